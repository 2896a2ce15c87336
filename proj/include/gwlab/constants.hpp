#pragma once

// Closed-form constants of the strongly critical theory:
//   gamma_i = 2^{-(N-i)}
//   c_{N,N} = 1/b_N,  c_{i,N} = (1/b_N)^{1/2^{N-i}} prod_{j=i}^{N-1} (m_{j,j+1}/b_j)^{1/2^{j-i+1}}
//   D_i     = (b_i m_{i,i+1})^{1/2^i} c_{1,i}      (c_{1,i}: same formula, terminal type i)
//   g_{i,N} = gamma_i c_{i,N}
// Everything is accumulated on the log scale. Indices in comments are 1-based.

#include <cmath>
#include <cstddef>
#include <vector>

#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"

namespace gwlab {

struct ConstantSet {
  std::size_t n = 0;
  std::vector<double> gamma;  // gamma[i] for type i+1
  std::vector<double> c;      // c_{i,N}
  std::vector<double> D;      // D_i for i = 1..N-1 (size N-1)
  std::vector<double> g;      // g_{i,N}
  double b_last = 0.0;        // b_N, kept for identity checks
};

namespace detail {

/// log c_{first, terminal} (0-based type indices).
inline double log_c(const std::vector<double>& b, const std::vector<double>& link, std::size_t first,
                    std::size_t terminal) {
  double acc = -std::ldexp(std::log(b[terminal]), -static_cast<int>(terminal - first));
  for (std::size_t j = first; j < terminal; ++j)
    acc += std::ldexp(std::log(link[j]) - std::log(b[j]), -static_cast<int>(j - first + 1));
  return acc;
}

}  // namespace detail

/// Needs b_i > 0 for every type and m_{i,i+1} > 0 for every link.
inline ConstantSet constant_set(const MomentData& md) {
  const std::size_t n = md.types();
  if (n == 0) throw InvalidMoments("no types");
  std::vector<double> b = md.half_variance;
  std::vector<double> link(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(b[i] > 0.0) || !std::isfinite(b[i]))
      throw InvalidMoments("b_" + std::to_string(i + 1) + " must be positive and finite");
    if (i + 1 < n) {
      link[i] = md.mean(i, i + 1);
      if (!(link[i] > 0.0) || !std::isfinite(link[i]))
        throw InvalidMoments("m_" + std::to_string(i + 1) + "," + std::to_string(i + 2) + " must be positive");
    }
  }

  ConstantSet cs;
  cs.n = n;
  cs.b_last = b[n - 1];
  for (std::size_t i = 0; i < n; ++i) {
    cs.gamma.push_back(std::ldexp(1.0, -static_cast<int>(n - 1 - i)));
    cs.c.push_back(std::exp(detail::log_c(b, link, i, n - 1)));
    cs.g.push_back(cs.gamma.back() * cs.c.back());
  }
  // D_i, 1-based i = 1..N-1  ->  0-based t = 0..N-2, exponent 1/2^{t+1}.
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const double log_d = std::ldexp(std::log(b[t]) + std::log(link[t]), -static_cast<int>(t + 1)) +
                         detail::log_c(b, link, 0, t);
    cs.D.push_back(std::exp(log_d));
  }
  return cs;
}

struct IdentityCheck {
  bool holds = false;
  double residual = 0.0;  // relative
};

/// c_{1,N} = D_{N-1} (1/b_N)^{1/2^{N-1}}, to 1e-12 relative. Requires N >= 2.
inline IdentityCheck check_identity_c1N(const ConstantSet& cs) {
  if (cs.n < 2) throw InvalidMoments("identity needs at least two types");
  const double rhs = cs.D[cs.n - 2] * std::exp(-std::ldexp(std::log(cs.b_last), -static_cast<int>(cs.n - 1)));
  const double residual = std::abs(cs.c[0] - rhs) / cs.c[0];
  return {residual <= 1e-12, residual};
}

}  // namespace gwlab
