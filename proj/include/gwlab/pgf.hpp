#pragma once

// Exact generating-function engine: iterates of the vector pgf F, survival
// tables, extinction-time probabilities and conditional/censored transforms.
//
// Every difference of two iterates (pmf values, numerators of conditional
// transforms, h_n(s) - h_n(0)) is carried by a paired recurrence: both orbits
// advance together and their gap is propagated through law_gap, so nothing
// small is ever obtained by subtracting two numbers close to 1.

#include <cfloat>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"
#include "gwlab/numeric.hpp"

namespace gwlab {

/// q_i(n) = P_i(Z(n) = 0) for n = 0..horizon, in value/complement form, with
/// the one-step decrements d_i(n-1) - d_i(n) of d_i(n) = 1 - q_i(n).
class SurvivalTable {
 public:
  SurvivalTable() = default;

  std::size_t types() const noexcept { return q_.empty() ? 0 : q_.front().size(); }
  long long horizon() const noexcept { return static_cast<long long>(q_.size()) - 1; }

  /// Step at which monotonicity failed; the table stops just before it.
  std::optional<long long> precision_loss_at() const noexcept { return loss_at_; }

  const Prob& q(std::size_t i, long long n) const { return q_.at(index(n))[i]; }
  /// d_i(n) = P_i(Z(n) != 0).
  double d(std::size_t i, long long n) const { return q(i, n).c; }
  /// d_i(n-1) - d_i(n), n >= 1.
  double step(std::size_t i, long long n) const {
    if (n < 1) throw std::out_of_range("step index must be >= 1");
    return step_.at(index(n))[i];
  }
  const Point& extinction_point(long long n) const { return q_.at(index(n)); }

 private:
  friend SurvivalTable build_survival_table(const ProcessSpec& spec, long long n_max);

  static std::size_t index(long long n) {
    if (n < 0) throw std::out_of_range("negative generation index");
    return static_cast<std::size_t>(n);
  }

  std::vector<Point> q_;
  std::vector<std::vector<double>> step_;  // step_[0] unused
  std::optional<long long> loss_at_;
};

/// d(n+1) = 1 - F(1 - d(n)) from d(0) = 1, with decrements from the paired recurrence.
inline SurvivalTable build_survival_table(const ProcessSpec& spec, long long n_max) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const std::size_t types = spec.types();
  SurvivalTable t;
  t.q_.reserve(static_cast<std::size_t>(n_max) + 1);
  t.step_.reserve(static_cast<std::size_t>(n_max) + 1);
  t.q_.push_back(Point(types, Prob::zero()));
  t.step_.push_back(std::vector<double>(types, 0.0));

  for (long long n = 1; n <= n_max; ++n) {
    const Point& prev = t.q_.back();
    Point next = apply_all(spec, prev);
    std::vector<double> step(types);
    if (n == 1) {
      for (std::size_t i = 0; i < types; ++i) step[i] = next[i].v;
    } else {
      const Point& prev2 = t.q_[static_cast<std::size_t>(n - 2)];
      const auto& prev_step = t.step_.back();
      for (std::size_t i = 0; i < types; ++i) step[i] = law_gap(spec.law(i), prev, prev2, prev_step);
    }
    bool ok = true;
    for (std::size_t i = 0; i < types; ++i)
      if (step[i] < 0.0 || next[i].c > prev[i].c || !std::isfinite(step[i])) ok = false;
    if (!ok) {
      t.loss_at_ = n;
      break;
    }
    t.q_.push_back(std::move(next));
    t.step_.push_back(std::move(step));
  }
  return t;
}

/// P_i(T_{iN} = n) = d_i(n-1) - d_i(n) for 1 <= n <= horizon.
inline double extinction_time_pmf(const SurvivalTable& table, std::size_t i, long long n) {
  if (n < 1 || n > table.horizon()) throw std::out_of_range("n outside 1..horizon");
  const double p = table.step(i, n);
  if (p > 0.0 && p < DBL_MIN) throw PrecisionLoss(n, "extinction probability underflows");
  return p;
}

// ---------------------------------------------------------------------------
// Iterates

/// F^{(m)}(s).
inline Point iterate_point(const ProcessSpec& spec, Point s, long long m) {
  for (long long k = 0; k < m; ++k) s = apply_all(spec, s);
  return s;
}

/// Two orbits advanced together; `delta` is a - b, propagated exactly.
struct PairedOrbit {
  Point a;
  Point b;
  std::vector<double> delta;
};

inline void advance(const ProcessSpec& spec, PairedOrbit& orbit, long long steps) {
  const std::size_t types = spec.types();
  std::vector<double> next_delta(types);
  for (long long k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < types; ++i) next_delta[i] = law_gap(spec.law(i), orbit.a, orbit.b, orbit.delta);
    orbit.a = apply_all(spec, orbit.a);
    orbit.b = apply_all(spec, orbit.b);
    orbit.delta.swap(next_delta);
  }
}

/// Scalar counterpart for the last type's pgf h.
struct ScalarOrbit {
  Prob a;
  Prob b;
  double delta = 0.0;
};

inline void advance_last(const ProcessSpec& spec, ScalarOrbit& orbit, long long steps) {
  for (long long k = 0; k < steps; ++k) {
    const double d = gap_last(spec, orbit.a, orbit.b, orbit.delta);
    orbit.a = apply_last(spec, orbit.a);
    orbit.b = apply_last(spec, orbit.b);
    orbit.delta = d;
  }
}

/// h_m(s) for the last type.
inline Prob iterate_last(const ProcessSpec& spec, Prob s, long long m) {
  for (long long k = 0; k < m; ++k) s = apply_last(spec, s);
  return s;
}

namespace detail {

inline void require_window(const SurvivalTable& table, long long m, long long n) {
  if (m < 0 || m >= n) throw std::invalid_argument("need 0 <= m < n");
  if (n > table.horizon()) throw std::out_of_range("n beyond survival table horizon");
}

inline double checked_ratio(double num, double den, long long n) {
  if (den == 0.0) throw UnreachableEvent("P(T_N = " + std::to_string(n) + ") = 0 for this process");
  if (num != 0.0 && std::abs(num) < DBL_MIN) throw PrecisionLoss(n, "conditional numerator underflows");
  return num / den;
}

}  // namespace detail

/// E[prod_j s_j^{Z_j(m)} | T_N = n] from Z(0) = e_1.
///
/// E[prod s_j^{Z_j(m)}; T_N <= m + k] = F^{(m)}(s * q(k))_1, so the numerator is
/// the gap between the orbits started at s*q(n-m) and s*q(n-m-1).
inline double conditional_transform(const ProcessSpec& spec, const SurvivalTable& table, const Point& s, long long m,
                                    long long n) {
  detail::require_window(table, m, n);
  const std::size_t types = spec.types();
  const long long k = n - m;
  PairedOrbit orbit{Point(types), Point(types), std::vector<double>(types)};
  for (std::size_t j = 0; j < types; ++j) {
    orbit.a[j] = times(s[j], table.q(j, k));
    orbit.b[j] = times(s[j], table.q(j, k - 1));
    orbit.delta[j] = s[j].v * table.step(j, k);
  }
  advance(spec, orbit, m);
  return detail::checked_ratio(orbit.delta[0], table.step(0, n), n);
}

/// E[sa^{Z_N(m)} I_{N-1}(t)] - E[sb^{Z_N(m)} I_{N-1}(t)] for 1 <= t <= m,
/// with delta = sa - sb. Types 1..N-1 are extinct at t, so only Z_N(m) matters:
/// the last type's chain runs m - t steps, then F^{(t)} from (0,...,0,u).
inline double censored_gap(const ProcessSpec& spec, Prob sa, Prob sb, double delta, long long t, long long m) {
  if (t < 1 || t > m) throw std::invalid_argument("need 1 <= t <= m");
  ScalarOrbit chain{sa, sb, delta};
  advance_last(spec, chain, m - t);
  const std::size_t types = spec.types();
  PairedOrbit orbit{Point(types, Prob::zero()), Point(types, Prob::zero()), std::vector<double>(types, 0.0)};
  orbit.a[types - 1] = chain.a;
  orbit.b[types - 1] = chain.b;
  orbit.delta[types - 1] = chain.delta;
  advance(spec, orbit, t);
  return orbit.delta[0];
}

/// E[prod_j s_j^{Z_j(m)} I_{N-1}(t)], optionally conditioned on T_N = n.
///
/// I_{N-1}(t) is the indicator that types 1..N-1 are extinct at time t;
/// t = 0 disables censoring.
inline double censored_transform(const ProcessSpec& spec, const SurvivalTable* table, const Point& s, long long t,
                                 long long m, std::optional<long long> n = std::nullopt) {
  if (t < 0 || t > m) throw std::invalid_argument("need 0 <= t <= m");
  const std::size_t last = spec.types() - 1;
  if (!n) {
    if (t == 0) return iterate_point(spec, s, m)[0].v;
    const Prob u = iterate_last(spec, s[last], m - t);
    Point x(spec.types(), Prob::zero());
    x[last] = u;
    return iterate_point(spec, x, t)[0].v;
  }
  if (table == nullptr) throw std::invalid_argument("conditioning on T_N needs a survival table");
  if (t == 0) return conditional_transform(spec, *table, s, m, *n);
  detail::require_window(*table, m, *n);
  const long long k = *n - m;
  const double num = censored_gap(spec, times(s[last], table->q(last, k)), times(s[last], table->q(last, k - 1)),
                                  s[last].v * table->step(last, k), t, m);
  return detail::checked_ratio(num, table->step(0, *n), *n);
}

// ---------------------------------------------------------------------------
// Harmonic measure

struct HarmonicValue {
  double value = 0.0;       // b_N n^2 (h_n(s) - h_n(0))
  double half_value = 0.0;  // same at n/2
  double estimate = 0.0;    // |value - half_value|
};

/// b_N n^2 (h_n(s) - h_n(0)) with the gap carried by the paired recurrence.
inline HarmonicValue harmonic_U(const ProcessSpec& spec, double b_last, double s, long long n) {
  if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("harmonic_U needs s in [0,1)");
  if (n < 2) throw std::invalid_argument("harmonic_U needs n >= 2");
  ScalarOrbit orbit{Prob::from_value(s), Prob::zero(), s};
  const long long half = n / 2;
  advance_last(spec, orbit, half);
  const double half_gap = orbit.delta;
  advance_last(spec, orbit, n - half);
  if (orbit.delta != 0.0 && orbit.delta < DBL_MIN) throw PrecisionLoss(n, "h_n(s) - h_n(0) underflows");
  HarmonicValue hv;
  const auto nn = static_cast<double>(n);
  const auto hh = static_cast<double>(half);
  hv.value = b_last * nn * nn * orbit.delta;
  hv.half_value = b_last * hh * hh * half_gap;
  hv.estimate = std::abs(hv.value - hv.half_value);
  return hv;
}

}  // namespace gwlab
