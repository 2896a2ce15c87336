#pragma once

// Floating-point helpers shared by the exact engine: probabilities carried
// together with their complements, compensated summation and error-free
// transformations.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gwlab {

/// A probability-scale number stored as the pair (value, 1 - value).
///
/// Both halves are kept accurate so that quantities close to 1 (extinction
/// probabilities late in the process) keep full relative precision in their
/// complement.
struct Prob {
  double v = 0.0;
  double c = 1.0;

  static constexpr Prob from_value(double value) noexcept { return {value, 1.0 - value}; }
  static constexpr Prob from_complement(double comp) noexcept { return {1.0 - comp, comp}; }
  static constexpr Prob one() noexcept { return {1.0, 0.0}; }
  static constexpr Prob zero() noexcept { return {0.0, 1.0}; }

  /// log(v), using log1p(-c) where that is the accurate branch.
  double log_value() const noexcept { return v < 0.5 ? std::log(v) : std::log1p(-c); }
};

/// Product of two probabilities; complement accumulated as a sum of
/// non-negative terms: 1 - ab = (1 - a) + a(1 - b).
inline Prob times(Prob a, Prob b) noexcept {
  return {a.v * b.v, a.c + a.v * b.c};
}

/// Point in [0,1]^N in value/complement form.
using Point = std::vector<Prob>;

inline Point point_from_values(std::span<const double> s) {
  Point p;
  p.reserve(s.size());
  for (double x : s) p.push_back(Prob::from_value(x));
  return p;
}

inline Point point_from_complements(std::span<const double> d) {
  Point p;
  p.reserve(d.size());
  for (double x : d) p.push_back(Prob::from_complement(x));
  return p;
}

inline Point constant_point(std::size_t n, Prob x) { return Point(n, x); }

/// Knuth two-sum: a + b = s + err exactly.
inline void two_sum(double a, double b, double& s, double& err) noexcept {
  s = a + b;
  const double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    double s, e;
    two_sum(sum_, x, s, e);
    sum_ = s;
    comp_ += e;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }
  double residual() const noexcept { return comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// a^k - b^k for non-negative integer k, given delta = a - b computed
/// accurately by the caller. Non-negative whenever a >= b >= 0.
inline double power_gap(double a, double b, double delta, long long k) noexcept {
  if (k <= 0) return 0.0;
  if (k == 1) return delta;
  if (k <= 64) {
    // (a - b) * sum_{t<k} a^{k-1-t} b^t, Horner in a.
    double acc = 0.0;
    double bp = 1.0;
    for (long long t = 0; t < k; ++t) {
      acc = acc * a + bp;
      bp *= b;
    }
    return delta * acc;
  }
  // Well separated operands: the direct difference loses at most a few bits,
  // and b^k * expm1(...) would underflow times overflow.
  if (b <= 0.0 || delta >= 0.5 * b) return std::pow(a, static_cast<double>(k)) - std::pow(b, static_cast<double>(k));
  // b^k (exp(k log(a/b)) - 1), with log(a/b) = log1p(delta/b).
  return std::pow(b, static_cast<double>(k)) * std::expm1(static_cast<double>(k) * std::log1p(delta / b));
}

/// 1 - x^k for x in [0,1] given in complement form.
inline double power_complement(Prob x, long long k) noexcept {
  if (k <= 0) return 0.0;
  return -std::expm1(static_cast<double>(k) * x.log_value());
}

/// Locale-independent rendering with 17 significant digits.
inline std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace gwlab
