#pragma once

// Offspring laws and process descriptions for decomposable multitype
// Galton-Watson processes. Types are indexed 0..N-1 in code; a type-i parent
// only has children of types j >= i.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gwlab/errors.hpp"
#include "gwlab/families.hpp"
#include "gwlab/numeric.hpp"

namespace gwlab {

/// Independent marginals per child type.
struct ProductForm {
  std::vector<std::pair<std::size_t, Family>> children;  // (child type, family)
};

struct TableEntry {
  std::vector<long long> counts;  // counts over child types parent..N-1
  double p = 0.0;
};

/// Explicit joint law over offspring vectors.
struct FiniteTable {
  std::vector<TableEntry> entries;
};

struct OffspringLaw {
  std::size_t parent_type = 0;
  std::variant<ProductForm, FiniteTable> body;
};

/// Square matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix r(a.n_);
    for (std::size_t i = 0; i < a.n_; ++i)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < a.n_; ++j) r(i, j) += aik * b(k, j);
      }
    return r;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

class ProcessSpec {
 public:
  ProcessSpec() = default;

  /// Checks structural well-formedness; throws ConfigError on violations.
  explicit ProcessSpec(std::vector<OffspringLaw> laws) : laws_(std::move(laws)) { check_structure(); }

  std::size_t types() const noexcept { return laws_.size(); }
  const OffspringLaw& law(std::size_t i) const { return laws_.at(i); }
  const std::vector<OffspringLaw>& laws() const noexcept { return laws_; }

 private:
  void check_structure() const {
    const std::size_t n = laws_.size();
    if (n == 0) throw ConfigError("types", 0, "a process needs at least one type");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& law = laws_[i];
      const std::string field = "laws[" + std::to_string(i) + "]";  // 0-based by type
      if (law.parent_type != i)
        throw ConfigError(field, 0, "law for type " + std::to_string(i + 1) + " declares parent type " +
                                        std::to_string(law.parent_type + 1));
      if (const auto* pf = std::get_if<ProductForm>(&law.body)) {
        std::vector<bool> seen(n, false);
        for (const auto& [j, fam] : pf->children) {
          if (j < i || j >= n)
            throw ConfigError(field, 0, "child type " + std::to_string(j + 1) + " outside " +
                                            std::to_string(i + 1) + ".." + std::to_string(n));
          if (seen[j]) throw ConfigError(field, 0, "child type " + std::to_string(j + 1) + " listed twice");
          seen[j] = true;
          check_family(field, fam);
        }
      } else {
        const auto& table = std::get<FiniteTable>(law.body);
        if (table.entries.empty()) throw ConfigError(field, 0, "empty offspring table");
        CompensatedSum total;
        for (const auto& e : table.entries) {
          if (e.counts.size() != n - i)
            throw ConfigError(field, 0, "table counts must list " + std::to_string(n - i) + " entries (types " +
                                            std::to_string(i + 1) + ".." + std::to_string(n) + ")");
          for (long long c : e.counts)
            if (c < 0) throw ConfigError(field, 0, "negative offspring count");
          if (!(e.p >= 0.0 && e.p <= 1.0)) throw ConfigError(field, 0, "probability outside [0,1]");
          total += e.p;
        }
        if (std::abs(total.value() - 1.0) > 1e-12)
          throw ConfigError(field, 0, "table probabilities sum to " + format_double(total.value()));
      }
    }
  }

  static void check_family(const std::string& field, const Family& fam) {
    std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Bernoulli>) {
            if (!(f.p >= 0.0 && f.p <= 1.0)) throw ConfigError(field, 0, "bernoulli p outside [0,1]");
          } else if constexpr (std::is_same_v<T, PointMass>) {
            if (f.k < 0) throw ConfigError(field, 0, "point_mass k must be >= 0");
          } else {
            if (!(f.mean >= 0.0) || !std::isfinite(f.mean)) throw ConfigError(field, 0, "mean must be finite and >= 0");
          }
        },
        fam);
  }

  std::vector<OffspringLaw> laws_;
};

// ---------------------------------------------------------------------------
// One-step generating function

/// f_i(x) in value/complement form.
inline Prob apply_law(const OffspringLaw& law, std::span<const Prob> x) {
  if (const auto* pf = std::get_if<ProductForm>(&law.body)) {
    double value = 1.0;
    double log_sum = 0.0;
    for (const auto& [j, fam] : pf->children) {
      const Prob g = family_pgf(fam, x[j]);
      value *= g.v;
      log_sum += g.log_value();
    }
    return {value, -std::expm1(log_sum)};
  }
  const auto& table = std::get<FiniteTable>(law.body);
  const std::size_t base = law.parent_type;
  CompensatedSum value, comp;
  for (const auto& e : table.entries) {
    double log_mono = 0.0;
    for (std::size_t t = 0; t < e.counts.size(); ++t)
      if (e.counts[t] != 0) log_mono += static_cast<double>(e.counts[t]) * x[base + t].log_value();
    value += e.p * std::exp(log_mono);
    comp += e.p * -std::expm1(log_mono);
  }
  return {value.value(), comp.value()};
}

/// f_i(a) - f_i(b) given the coordinate differences delta = a - b.
///
/// The difference is telescoped coordinate by coordinate so no two nearly
/// equal pgf values are ever subtracted.
inline double law_gap(const OffspringLaw& law, std::span<const Prob> a, std::span<const Prob> b,
                      std::span<const double> delta) {
  if (const auto* pf = std::get_if<ProductForm>(&law.body)) {
    const std::size_t k = pf->children.size();
    std::vector<double> ga(k), gb(k), gd(k);
    for (std::size_t l = 0; l < k; ++l) {
      const auto& [j, fam] = pf->children[l];
      ga[l] = family_pgf(fam, a[j]).v;
      gb[l] = family_pgf(fam, b[j]).v;
      gd[l] = family_gap(fam, a[j], b[j], delta[j]);
    }
    // sum_l gd_l * prod_{j<l} gb_j * prod_{j>l} ga_j
    double suffix = 1.0;
    std::vector<double> suffix_a(k + 1, 1.0);
    for (std::size_t l = k; l-- > 0;) {
      suffix *= ga[l];
      suffix_a[l] = suffix;
    }
    double prefix_b = 1.0;
    CompensatedSum total;
    for (std::size_t l = 0; l < k; ++l) {
      total += gd[l] * prefix_b * suffix_a[l + 1];
      prefix_b *= gb[l];
    }
    return total.value();
  }
  const auto& table = std::get<FiniteTable>(law.body);
  const std::size_t base = law.parent_type;
  CompensatedSum total;
  for (const auto& e : table.entries) {
    const std::size_t k = e.counts.size();
    double suffix = 1.0;
    std::vector<double> suffix_a(k + 1, 1.0);
    for (std::size_t l = k; l-- > 0;) {
      if (e.counts[l] != 0) suffix *= std::pow(a[base + l].v, static_cast<double>(e.counts[l]));
      suffix_a[l] = suffix;
    }
    double prefix_b = 1.0;
    CompensatedSum mono;
    for (std::size_t l = 0; l < k; ++l) {
      const long long r = e.counts[l];
      if (r == 0) continue;
      const Prob& al = a[base + l];
      const Prob& bl = b[base + l];
      mono += power_gap(al.v, bl.v, delta[base + l], r) * prefix_b * suffix_a[l + 1];
      prefix_b *= std::pow(bl.v, static_cast<double>(r));
    }
    total += e.p * mono.value();
  }
  return total.value();
}

/// pgf_eval: f_i(s) for s given as plain values.
inline double pgf_eval(const ProcessSpec& spec, std::size_t i, std::span<const double> s) {
  const Point x = point_from_values(s);
  return apply_law(spec.law(i), x).v;
}

/// survival_map: 1 - f_i(1 - d), evaluated without forming 1 - d.
inline double survival_map(const ProcessSpec& spec, std::size_t i, std::span<const double> d) {
  const Point x = point_from_complements(d);
  return apply_law(spec.law(i), x).c;
}

/// Applies every law: F(x) = (f_0(x), ..., f_{N-1}(x)).
inline Point apply_all(const ProcessSpec& spec, std::span<const Prob> x) {
  Point out(spec.types());
  for (std::size_t i = 0; i < spec.types(); ++i) out[i] = apply_law(spec.law(i), x);
  return out;
}

/// The scalar pgf h of the last type, h(s) = E[s^{eta_{N,N}}].
inline Prob apply_last(const ProcessSpec& spec, Prob s) {
  const std::size_t n = spec.types();
  Point x(n, Prob::one());
  x[n - 1] = s;
  return apply_law(spec.law(n - 1), x);
}

/// h(a) - h(b) for the last type's scalar pgf.
inline double gap_last(const ProcessSpec& spec, Prob a, Prob b, double delta) {
  const std::size_t n = spec.types();
  Point xa(n, Prob::one()), xb(n, Prob::one());
  std::vector<double> d(n, 0.0);
  xa[n - 1] = a;
  xb[n - 1] = b;
  d[n - 1] = delta;
  return law_gap(spec.law(n - 1), xa, xb, d);
}

// ---------------------------------------------------------------------------
// Moments and Hypothesis A

struct MomentData {
  Matrix mean;                   // mean(i, j) = E[eta_{i,j}]
  std::vector<double> half_variance;  // b_i = Var[eta_{i,i}] / 2
  std::vector<Matrix> second;    // second[i](j, k) = E[eta_{i,j} eta_{i,k}]

  std::size_t types() const noexcept { return half_variance.size(); }
};

inline MomentData compute_moments(const ProcessSpec& spec) {
  const std::size_t n = spec.types();
  MomentData md{Matrix(n), std::vector<double>(n, 0.0), std::vector<Matrix>(n, Matrix(n))};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& law = spec.law(i);
    Matrix& sec = md.second[i];
    if (const auto* pf = std::get_if<ProductForm>(&law.body)) {
      for (const auto& [j, fam] : pf->children) md.mean(i, j) = family_mean(fam);
      for (const auto& [j, fam] : pf->children) {
        for (const auto& [k, fam2] : pf->children) {
          sec(j, k) = (j == k) ? family_factorial2(fam) + family_mean(fam) : md.mean(i, j) * md.mean(i, k);
        }
      }
    } else {
      const auto& table = std::get<FiniteTable>(law.body);
      for (const auto& e : table.entries) {
        for (std::size_t a = 0; a < e.counts.size(); ++a) {
          const double ca = static_cast<double>(e.counts[a]);
          md.mean(i, i + a) += e.p * ca;
          for (std::size_t b = 0; b < e.counts.size(); ++b)
            sec(i + a, i + b) += e.p * ca * static_cast<double>(e.counts[b]);
        }
      }
    }
    const double m = md.mean(i, i);
    md.half_variance[i] = 0.5 * (sec(i, i) - m * m);
  }
  return md;
}

struct Violation {
  enum class Kind { NonCritical, MissingLink, DegenerateVariance };
  Kind kind;
  std::size_t type;  // 0-based
  double value;

  std::string describe() const {
    const std::string t = std::to_string(type + 1);
    switch (kind) {
      case Kind::NonCritical: return "NonCritical(" + t + "): m_ii = " + format_double(value);
      case Kind::MissingLink: return "MissingLink(" + t + "): m_i,i+1 = " + format_double(value);
      case Kind::DegenerateVariance: return "DegenerateVariance(" + t + "): b_i = " + format_double(value);
    }
    return {};
  }
};

struct ValidationOptions {
  /// Allowed |m_ii - 1|. Widening it is the explicit opt-in for near-critical studies.
  double critical_tolerance = 1e-10;
};

/// Result of checking strong criticality. Moments are always filled in;
/// `ok()` tells whether they certify the hypothesis. Moment finiteness is
/// structural: every supported family has all moments.
struct Validation {
  MomentData moments;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

inline Validation validate_hypothesis_A(const ProcessSpec& spec, ValidationOptions opts = {}) {
  Validation out{compute_moments(spec), {}};
  const auto& md = out.moments;
  const std::size_t n = spec.types();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(md.mean(i, i) - 1.0) > opts.critical_tolerance)
      out.violations.push_back({Violation::Kind::NonCritical, i, md.mean(i, i)});
    if (i + 1 < n && !(md.mean(i, i + 1) > 0.0 && std::isfinite(md.mean(i, i + 1))))
      out.violations.push_back({Violation::Kind::MissingLink, i, md.mean(i, i + 1)});
    if (!(md.half_variance[i] > 0.0))
      out.violations.push_back({Violation::Kind::DegenerateVariance, i, md.half_variance[i]});
  }
  return out;
}

/// n-step mean matrix m_{i,j}(n) = E[Z_j(n) | Z(0) = e_i].
inline Matrix expectation_matrix(const MomentData& md, unsigned long long n) {
  Matrix result = Matrix::identity(md.types());
  Matrix base = md.mean;
  while (n > 0) {
    if (n & 1ULL) result = result * base;
    base = base * base;
    n >>= 1ULL;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sampling

/// Adds the offspring of `count` independent type-i parents into `out`
/// (indexed by absolute child type).
template <class Rng>
void sample_offspring_sum(const OffspringLaw& law, Rng& rng, std::int64_t count, std::span<std::int64_t> out) {
  if (count <= 0) return;
  if (const auto* pf = std::get_if<ProductForm>(&law.body)) {
    for (const auto& [j, fam] : pf->children)
      out[j] += std::visit([&](const auto& f) { return f.sample_sum(rng, count); }, fam);
    return;
  }
  const auto& table = std::get<FiniteTable>(law.body);
  // Multinomial split of the parents over table rows via sequential binomials.
  std::int64_t remaining = count;
  double mass_left = 1.0;
  for (std::size_t r = 0; r < table.entries.size() && remaining > 0; ++r) {
    const auto& e = table.entries[r];
    std::int64_t take = remaining;
    if (r + 1 < table.entries.size()) {
      const double p = mass_left > 0.0 ? std::min(1.0, e.p / mass_left) : 1.0;
      if (p < 1.0) {
        std::binomial_distribution<std::int64_t> bd(remaining, p);
        take = bd(rng);
      }
    }
    mass_left -= e.p;
    remaining -= take;
    if (take == 0) continue;
    for (std::size_t t = 0; t < e.counts.size(); ++t) out[law.parent_type + t] += take * e.counts[t];
  }
}

/// One offspring vector of a type-i parent.
template <class Rng>
std::vector<std::int64_t> sample_offspring(const ProcessSpec& spec, std::size_t i, Rng& rng) {
  std::vector<std::int64_t> out(spec.types(), 0);
  sample_offspring_sum(spec.law(i), rng, 1, out);
  return out;
}

}  // namespace gwlab
