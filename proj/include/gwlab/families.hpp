#pragma once

// Parametric marginal offspring families. Each family provides exact pgf
// evaluation in value/complement form, the difference g(a) - g(b) for nearby
// arguments, its first two factorial moments and a sampler for the sum of
// `count` independent copies.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "gwlab/numeric.hpp"

namespace gwlab {

/// Geometric law on {0, 1, ...} parameterised by its mean: pgf 1 / (1 + mean (1 - s)).
struct Geometric {
  double mean = 1.0;

  Prob pgf(Prob x) const noexcept {
    const double t = mean * x.c;
    return {1.0 / (1.0 + t), t / (1.0 + t)};
  }
  double gap(Prob a, Prob b, double delta) const noexcept {
    return mean * delta / ((1.0 + mean * a.c) * (1.0 + mean * b.c));
  }
  double factorial2() const noexcept { return 2.0 * mean * mean; }
  template <class Rng>
  std::int64_t sample_sum(Rng& rng, std::int64_t count) const {
    if (count <= 0 || mean <= 0.0) return 0;
    std::negative_binomial_distribution<std::int64_t> nb(count, 1.0 / (1.0 + mean));
    return nb(rng);
  }
};

struct Poisson {
  double mean = 1.0;

  Prob pgf(Prob x) const noexcept {
    const double t = mean * x.c;
    return {std::exp(-t), -std::expm1(-t)};
  }
  double gap(Prob /*a*/, Prob b, double delta) const noexcept {
    return std::exp(-mean * b.c) * std::expm1(mean * delta);
  }
  double factorial2() const noexcept { return mean * mean; }
  template <class Rng>
  std::int64_t sample_sum(Rng& rng, std::int64_t count) const {
    if (count <= 0 || mean <= 0.0) return 0;
    std::poisson_distribution<std::int64_t> pd(mean * static_cast<double>(count));
    return pd(rng);
  }
};

struct Bernoulli {
  double p = 0.5;

  Prob pgf(Prob x) const noexcept { return {(1.0 - p) + p * x.v, p * x.c}; }
  double gap(Prob, Prob, double delta) const noexcept { return p * delta; }
  double factorial2() const noexcept { return 0.0; }
  template <class Rng>
  std::int64_t sample_sum(Rng& rng, std::int64_t count) const {
    if (count <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return count;
    std::binomial_distribution<std::int64_t> bd(count, p);
    return bd(rng);
  }
};

struct PointMass {
  long long k = 0;

  Prob pgf(Prob x) const noexcept {
    if (k == 0) return Prob::one();
    return {std::pow(x.v, static_cast<double>(k)), power_complement(x, k)};
  }
  double gap(Prob a, Prob b, double delta) const noexcept { return power_gap(a.v, b.v, delta, k); }
  double factorial2() const noexcept { return static_cast<double>(k) * static_cast<double>(k - 1); }
  template <class Rng>
  std::int64_t sample_sum(Rng&, std::int64_t count) const {
    return count <= 0 ? 0 : count * k;
  }
};

using Family = std::variant<Geometric, Poisson, Bernoulli, PointMass>;

inline double family_mean(const Family& f) {
  return std::visit(
      [](const auto& fam) -> double {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Bernoulli>) return fam.p;
        else if constexpr (std::is_same_v<T, PointMass>) return static_cast<double>(fam.k);
        else return fam.mean;
      },
      f);
}

inline double family_factorial2(const Family& f) {
  return std::visit([](const auto& fam) { return fam.factorial2(); }, f);
}

inline double family_variance(const Family& f) {
  const double m = family_mean(f);
  return family_factorial2(f) + m - m * m;
}

inline Prob family_pgf(const Family& f, Prob x) {
  return std::visit([x](const auto& fam) { return fam.pgf(x); }, f);
}

inline double family_gap(const Family& f, Prob a, Prob b, double delta) {
  return std::visit([&](const auto& fam) { return fam.gap(a, b, delta); }, f);
}

inline std::string family_name(const Family& f) {
  struct Namer {
    std::string operator()(const Geometric& g) const { return "geometric(mean=" + num(g.mean) + ")"; }
    std::string operator()(const Poisson& p) const { return "poisson(mean=" + num(p.mean) + ")"; }
    std::string operator()(const Bernoulli& b) const { return "bernoulli(p=" + num(b.p) + ")"; }
    std::string operator()(const PointMass& m) const { return "point_mass(k=" + std::to_string(m.k) + ")"; }
    static std::string num(double x) { return format_double(x); }
  };
  return std::visit(Namer{}, f);
}

}  // namespace gwlab
