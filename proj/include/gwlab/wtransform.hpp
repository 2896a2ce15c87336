#pragma once

// Laplace/pgf transform of W_N, the total number of type-N children born to
// parents of types 1..N-1 over the whole life of the process.
//
// phi_i(s) = E_i[s^{W_N}] solves phi_i = f_i(phi_i, ..., phi_{N-1}, s), which is
// handled for i = N-1 down to 1 as a scalar fixed point. The map
// phi -> f_i(phi, ...) is convex and increasing, so monotone iteration from 0
// converges to the smallest root; Aitken extrapolation is accepted only when
// the extrapolated point stays below the root.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"
#include "gwlab/numeric.hpp"

namespace gwlab {

struct WTransform {
  std::vector<Prob> phi;   // phi[i] = E_{i}[s^{W_N}], types 0..N-2
  std::size_t iterations = 0;
  double residual = 0.0;   // max |f_i(phi) - phi_i| over the solves
  bool converged = true;

  Prob first() const { return phi.front(); }
};

struct WSolveOptions {
  std::size_t max_iterations = 1'000'000;
  double abs_tol = 1e-16;
  double rel_tol = 1e-14;
};

namespace detail {

struct ScalarSolve {
  Prob root;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Smallest fixed point of x -> f_i(x) in coordinate i, other coordinates fixed.
inline ScalarSolve solve_coordinate(const OffspringLaw& law, Point x, std::size_t i, const WSolveOptions& opt) {
  auto step = [&](Prob xi) {
    x[i] = xi;
    return apply_law(law, x);
  };
  ScalarSolve out;
  Prob u0 = Prob::zero();
  while (out.iterations < opt.max_iterations) {
    const Prob u1 = step(u0);
    const Prob u2 = step(u1);
    out.iterations += 2;
    // Complements decrease monotonically towards the root.
    const double d1 = u0.c - u1.c;
    const double d2 = u1.c - u2.c;
    // From below the iterates rise strictly; a non-positive step is rounding noise at the root.
    if (d1 <= 0.0 || d2 <= 0.0) {
      out.root = u2;
      out.converged = true;
      break;
    }
    const double rho = d1 > 0.0 ? d2 / d1 : 1.0;
    if (rho < 1.0 && d2 * rho / (1.0 - rho) <= opt.abs_tol + opt.rel_tol * u2.c) {
      out.root = u2;
      out.converged = true;
      break;
    }
    Prob next = u2;
    const double denom = d2 - d1;
    if (denom != 0.0 && rho < 1.0) {
      const double cstar = u2.c + d2 * d2 / denom;  // u2 - d2^2/(d2 - d1) in complement form
      if (cstar >= 0.0 && cstar < u2.c) {
        const Prob cand = Prob::from_complement(cstar);
        const Prob fc = step(cand);
        ++out.iterations;
        if (fc.c <= cand.c) next = cand;  // f(cand) >= cand: still below the root
      }
    }
    u0 = next;
    out.root = u2;
  }
  const Prob f = step(out.root);
  out.residual = std::abs(f.c - out.root.c);
  return out;
}

}  // namespace detail

/// Solves for phi_i(s), i = N-1 down to 1. Requires N >= 2.
inline WTransform w_transform(const ProcessSpec& spec, Prob s, const WSolveOptions& opt = {}) {
  const std::size_t types = spec.types();
  if (types < 2) throw std::invalid_argument("W_N needs at least two types");
  WTransform w;
  w.phi.assign(types - 1, Prob::one());
  Point x(types, Prob::one());
  x[types - 1] = s;
  if (s.c == 0.0) return w;  // W_N is finite almost surely
  for (std::size_t i = types - 1; i-- > 0;) {
    const auto solve = detail::solve_coordinate(spec.law(i), x, i, opt);
    w.phi[i] = solve.root;
    x[i] = solve.root;
    w.iterations += solve.iterations;
    w.residual = std::max(w.residual, solve.residual);
    w.converged = w.converged && solve.converged;
  }
  return w;
}

/// phi_1(s) as a plain value; throws SlowConvergence when the cap is hit.
inline double w_transform_value(const ProcessSpec& spec, double s, const WSolveOptions& opt = {}) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("s must lie in [0,1]");
  const auto w = w_transform(spec, Prob::from_value(s), opt);
  if (!w.converged) throw SlowConvergence(w.iterations, w.residual);
  return w.first().v;
}

/// 1 - E[exp(-theta W_N)], solved directly in complement form.
inline double w_laplace_complement(const ProcessSpec& spec, double theta, const WSolveOptions& opt = {}) {
  const auto w = w_transform(spec, Prob{std::exp(-theta), -std::expm1(-theta)}, opt);
  if (!w.converged) throw SlowConvergence(w.iterations, w.residual);
  return w.first().c;
}

namespace detail {

/// -d/dtheta of a function given its complement u(theta) = 1 - value:
/// central differences at steps h and 2h, Richardson-combined.
template <class Complement>
double richardson_slope(Complement&& u, double theta) {
  const double h = theta * 1e-4;
  const double d1 = (u(theta + h) - u(theta - h)) / (2.0 * h);
  const double d2 = (u(theta + 2.0 * h) - u(theta - 2.0 * h)) / (4.0 * h);
  return (4.0 * d1 - d2) / 3.0;
}

}  // namespace detail

/// E[W_N exp(-lambda W_N / (b_N n))] = -d/dtheta phi_1(e^{-theta}) at theta = lambda/(b_N n).
inline double w_weighted_mean(const ProcessSpec& spec, double b_last, double lambda, double n,
                              const WSolveOptions& opt = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double theta = lambda / (b_last * n);
  return detail::richardson_slope([&](double th) { return w_laplace_complement(spec, th, opt); }, theta);
}

/// E[xa^{W_N} I_{N-1}(t)] - E[xb^{W_N} I_{N-1}(t)], delta = xa - xb.
///
/// Over t generations, type-N children of lower-type parents are marked with x
/// and not followed further; evaluating at 0 for types 1..N-1 picks the event
/// that those types are extinct at t, in which case W_N is complete.
inline double w_censored_gap(const ProcessSpec& spec, Prob xa, Prob xb, double delta, long long t) {
  const std::size_t types = spec.types();
  if (types < 2) throw std::invalid_argument("W_N needs at least two types");
  if (t < 1) throw std::invalid_argument("censoring time must be >= 1");
  Point a(types, Prob::zero()), b(types, Prob::zero());
  std::vector<double> d(types, 0.0), nd(types, 0.0);
  a[types - 1] = xa;
  b[types - 1] = xb;
  d[types - 1] = delta;
  Point na(types), nb(types);
  for (long long k = 0; k < t; ++k) {
    for (std::size_t i = 0; i + 1 < types; ++i) {
      nd[i] = law_gap(spec.law(i), a, b, d);
      na[i] = apply_law(spec.law(i), a);
      nb[i] = apply_law(spec.law(i), b);
    }
    for (std::size_t i = 0; i + 1 < types; ++i) {
      a[i] = na[i];
      b[i] = nb[i];
      d[i] = nd[i];
    }
  }
  return d[0];
}

/// E[x^{W_N} I_{N-1}(t)].
inline double w_censored_transform(const ProcessSpec& spec, Prob x, long long t) {
  const std::size_t types = spec.types();
  if (types < 2) throw std::invalid_argument("W_N needs at least two types");
  Point y(types, Prob::zero());
  y[types - 1] = x;
  Point next(types);
  for (long long k = 0; k < t; ++k) {
    for (std::size_t i = 0; i + 1 < types; ++i) next[i] = apply_law(spec.law(i), y);
    for (std::size_t i = 0; i + 1 < types; ++i) y[i] = next[i];
  }
  return y[0].v;
}

/// E[W_N exp(-lambda W_N/(b_N n)) I_{N-1}(t)] via the same Richardson scheme,
/// each central difference computed as a single paired gap.
inline double w_weighted_mean_censored(const ProcessSpec& spec, double b_last, double lambda, double n, long long t) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double theta = lambda / (b_last * n);
  auto central = [&](double h) {
    const double lo = theta - h, hi = theta + h;
    const Prob xa{std::exp(-lo), -std::expm1(-lo)};
    const Prob xb{std::exp(-hi), -std::expm1(-hi)};
    const double delta = std::exp(-theta) * 2.0 * std::sinh(h);
    return w_censored_gap(spec, xa, xb, delta, t) / (2.0 * h);
  };
  const double h = theta * 1e-4;
  return (4.0 * central(h) - central(2.0 * h)) / 3.0;
}

}  // namespace gwlab
