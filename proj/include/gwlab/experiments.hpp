#pragma once

// Drivers that put finite-n values from the exact engine next to the
// limiting formulas and collect them into convergence reports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwlab/constants.hpp"
#include "gwlab/errors.hpp"
#include "gwlab/model.hpp"
#include "gwlab/numeric.hpp"
#include "gwlab/pgf.hpp"
#include "gwlab/wtransform.hpp"

namespace gwlab {

// ---------------------------------------------------------------------------
// Limit formulas

/// Limit of E[... exp(-lambda Z_N(m)/(b_N n)) | T_N = n] for m ~ x n.
inline double limit_finalstage(double lambda, double x, std::size_t types) {
  const double a = 1.0 + lambda * (1.0 - x);
  const double b = 1.0 + lambda * x * (1.0 - x);
  const double expo = -1.0 + std::ldexp(1.0, -static_cast<int>(types - 1));
  return std::pow(a / b, expo) / (b * b);
}

/// Limit of E[... exp(-lambda Z_N(m)/(b_N k)) | T_N = n] for 1 << k << n.
inline double limit_death(double lambda) { return 1.0 / ((1.0 + lambda) * (1.0 + lambda)); }

using HarmonicFn = std::function<double(double)>;

/// Limit of E[s^{Z_N(m)} | T_N = n] for fixed k = n - m:
/// U(s h_k(0)) - U(s h_{k-1}(0)), where h_j(0) are the last type's extinction
/// probabilities; k = 0 gives Z_N(n) = 0, i.e. 1.
inline double limit_deathfin(double s, long long k, const HarmonicFn& U, const std::function<double(long long)>& h0) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (k == 0) return 1.0;
  if (s == 0.0) return 0.0;
  return U(s * h0(k)) - U(s * h0(k - 1));
}

/// U from the harmonic-measure recurrence at a fixed large n.
inline HarmonicFn harmonic_evaluator(const ProcessSpec& spec, double b_last, long long n) {
  return [&spec, b_last, n](double s) { return s == 0.0 ? 0.0 : harmonic_U(spec, b_last, s, n).value; };
}

// ---------------------------------------------------------------------------
// Reports

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

struct ReportRow {
  std::vector<double> params;  // aligned with ConvergenceReport::param_names
  double value = 0.0;
  double limit = 0.0;
  double ratio = 0.0;
  bool precision_ok = true;
};

struct ConvergenceReport {
  std::string experiment;
  std::string model;
  std::vector<std::string> param_names;
  std::vector<ReportRow> rows;
  std::map<std::string, double> summary;  // e.g. fitted slope
  std::optional<Band> band;
  bool pass = false;
  std::string detail;

  bool precision_clean() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.precision_ok; });
  }
  const ReportRow& last() const { return rows.back(); }
};

inline ReportRow make_row(std::vector<double> params, const std::function<double()>& value, double limit) {
  ReportRow row;
  row.params = std::move(params);
  row.limit = limit;
  try {
    row.value = value();
  } catch (const PrecisionLoss&) {
    row.precision_ok = false;
    row.value = std::nan("");
  } catch (const SlowConvergence&) {
    row.precision_ok = false;
    row.value = std::nan("");
  }
  row.ratio = limit != 0.0 ? row.value / limit : std::nan("");
  return row;
}

/// Evaluates fn(0..count-1) on worker threads; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, Fn&& fn, unsigned workers = 0) {
  std::vector<T> out(count);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, count); ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) out[i] = fn(i);
      });
  }
  return out;
}

/// Verdict: all rows precision-clean and, when a band is set, the last
/// row's ratio inside it.
inline void judge_final_ratio(ConvergenceReport& rep) {
  if (!rep.precision_clean()) {
    rep.pass = false;
    rep.detail = "precision flag raised";
    return;
  }
  if (rep.band) {
    const double r = rep.last().ratio;
    rep.pass = rep.band->contains(r);
    rep.detail = "final ratio " + format_double(r) + (rep.pass ? " inside " : " outside ") + "band [" +
                 format_double(rep.band->lo) + ", " + format_double(rep.band->hi) + "]";
  } else {
    rep.pass = true;
    rep.detail = "no band registered";
  }
}

/// Every row's ratio within the band.
inline void judge_all_ratios(ConvergenceReport& rep) {
  judge_final_ratio(rep);
  if (!rep.pass || !rep.band) return;
  for (const auto& r : rep.rows)
    if (!rep.band->contains(r.ratio)) {
      rep.pass = false;
      rep.detail = "ratio " + format_double(r.ratio) + " outside band";
      return;
    }
  rep.detail = "all ratios inside band [" + format_double(rep.band->lo) + ", " + format_double(rep.band->hi) + "]";
}

inline bool monotone_toward_one(const std::vector<double>& ratios) {
  if (ratios.size() < 2) return true;
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if (std::abs(ratios[i] - 1.0) > std::abs(ratios[i - 1] - 1.0)) return false;
  const bool up = ratios.back() >= ratios.front();
  for (std::size_t i = 1; i < ratios.size(); ++i)
    if ((ratios[i] >= ratios[i - 1]) != up && ratios[i] != ratios[i - 1]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Pre-registered tolerance bands

/// Bands keyed by "<experiment>/<model>", read from a JSON file:
///   {"rule": "...", "bands": {"death/zoo2": {"lo": .., "hi": .., ...}}}
class BandRegistry {
 public:
  BandRegistry() = default;

  static BandRegistry load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot read band file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str(), nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("", 0, std::string("band file: ") + e.what());
    }
    BandRegistry reg;
    reg.doc_ = j;
    if (!j.contains("bands") || !j["bands"].is_object()) throw ConfigError("bands", 0, "missing bands object");
    for (auto it = j["bands"].begin(); it != j["bands"].end(); ++it) {
      const auto& b = it.value();
      if (!b.contains("lo") || !b.contains("hi")) throw ConfigError("bands." + it.key(), 0, "needs lo and hi");
      reg.bands_[it.key()] = Band{b["lo"].get<double>(), b["hi"].get<double>()};
    }
    return reg;
  }

  std::optional<Band> find(const std::string& key) const {
    auto it = bands_.find(key);
    if (it == bands_.end()) return std::nullopt;
    return it->second;
  }

  void set(const std::string& key, const Band& band, nlohmann::json meta = nlohmann::json::object()) {
    bands_[key] = band;
    meta["lo"] = band.lo;
    meta["hi"] = band.hi;
    doc_["bands"][key] = std::move(meta);
  }

  void set_rule(const std::string& rule) { doc_["rule"] = rule; }
  std::string dump() const { return doc_.dump(2) + "\n"; }
  std::size_t size() const noexcept { return bands_.size(); }

 private:
  std::map<std::string, Band> bands_;
  nlohmann::json doc_ = nlohmann::json::object();
};

/// Band rule applied to a pilot ratio r at half the target n:
/// half-width 2|r - 1| + 0.005 around 1.
inline Band band_from_pilot(double pilot_ratio) {
  const double w = 2.0 * std::abs(pilot_ratio - 1.0) + 0.005;
  return {1.0 - w, 1.0 + w};
}

inline constexpr const char* kBandRule =
    "pilot run at half the target n (theta range scaled by 2 for the W-transform slope); "
    "band = [1 - w, 1 + w] with w = 2*|pilot_ratio - 1| + 0.005";

// ---------------------------------------------------------------------------
// Drivers

struct ModelContext {
  std::string name;
  const ProcessSpec* spec = nullptr;
  MomentData moments;
  ConstantSet constants;

  static ModelContext make(std::string name, const ProcessSpec& spec) {
    ModelContext ctx;
    ctx.name = std::move(name);
    ctx.spec = &spec;
    ctx.moments = compute_moments(spec);
    ctx.constants = constant_set(ctx.moments);
    return ctx;
  }
  std::size_t types() const { return spec->types(); }
  double b_last() const { return moments.half_variance.back(); }
};

/// Survival asymptotics: d_i(n) n^{gamma_i} / c_{i,N} -> 1.
inline ConvergenceReport verify_foster(const ModelContext& ctx, const SurvivalTable& table, std::size_t i,
                                       const std::vector<long long>& n_grid) {
  ConvergenceReport rep;
  rep.experiment = "foster";
  rep.model = ctx.name;
  rep.param_names = {"n", "type"};
  const double gamma = ctx.constants.gamma[i];
  const double c = ctx.constants.c[i];
  for (long long n : n_grid) {
    const double limit = c * std::pow(static_cast<double>(n), -gamma);
    rep.rows.push_back(make_row({double(n), double(i + 1)}, [&] { return table.d(i, n); }, limit));
  }
  judge_final_ratio(rep);
  return rep;
}

/// Local limit: P_i(T_{iN} = n) n^{1+gamma_i} / g_{i,N} -> 1.
inline ConvergenceReport verify_local(const ModelContext& ctx, const SurvivalTable& table, std::size_t i,
                                      const std::vector<long long>& n_grid) {
  ConvergenceReport rep;
  rep.experiment = "local";
  rep.model = ctx.name;
  rep.param_names = {"n", "type"};
  const double gamma = ctx.constants.gamma[i];
  const double g = ctx.constants.g[i];
  for (long long n : n_grid) {
    const double limit = g * std::pow(static_cast<double>(n), -(1.0 + gamma));
    rep.rows.push_back(make_row({double(n), double(i + 1)}, [&] { return extinction_time_pmf(table, i, n); }, limit));
  }
  judge_final_ratio(rep);
  return rep;
}

inline Point lower_point(std::size_t types, double s_lower, Prob s_last) {
  Point s(types, Prob::from_value(s_lower));
  s[types - 1] = s_last;
  return s;
}

inline Prob exp_prob(double rate) { return {std::exp(-rate), -std::expm1(-rate)}; }

/// m = round(x n), s_N = exp(-lambda/(b_N n)).
inline ConvergenceReport verify_finalstage(const ModelContext& ctx, const SurvivalTable& table, long long n,
                                           const std::vector<double>& x_grid, double lambda, double s_lower = 1.0) {
  ConvergenceReport rep;
  rep.experiment = "finalstage";
  rep.model = ctx.name;
  rep.param_names = {"n", "x", "m", "lambda", "s_lower"};
  const double b = ctx.b_last();
  rep.rows = parallel_map<ReportRow>(x_grid.size(), [&](std::size_t idx) {
    const double x = x_grid[idx];
    const long long m = std::llround(x * static_cast<double>(n));
    const Point s = lower_point(ctx.types(), s_lower, exp_prob(lambda / (b * static_cast<double>(n))));
    return make_row({double(n), x, double(m), lambda, s_lower},
                    [&] { return conditional_transform(*ctx.spec, table, s, m, n); },
                    limit_finalstage(lambda, x, ctx.types()));
  });
  judge_final_ratio(rep);
  return rep;
}

/// m = n - k, s_N = exp(-lambda/(b_N k)).
inline ConvergenceReport verify_death(const ModelContext& ctx, const SurvivalTable& table, long long n,
                                      const std::vector<long long>& k_grid, const std::vector<double>& lambda_grid,
                                      double s_lower = 1.0) {
  ConvergenceReport rep;
  rep.experiment = "death";
  rep.model = ctx.name;
  rep.param_names = {"n", "k", "lambda", "s_lower"};
  const double b = ctx.b_last();
  std::vector<std::pair<long long, double>> grid;
  for (long long k : k_grid)
    for (double l : lambda_grid) grid.emplace_back(k, l);
  rep.rows = parallel_map<ReportRow>(grid.size(), [&](std::size_t idx) {
    const auto [k, lambda] = grid[idx];
    const Point s = lower_point(ctx.types(), s_lower, exp_prob(lambda / (b * static_cast<double>(k))));
    return make_row({double(n), double(k), lambda, s_lower},
                    [&] { return conditional_transform(*ctx.spec, table, s, n - k, n); }, limit_death(lambda));
  });
  judge_all_ratios(rep);
  return rep;
}

/// Fixed k = n - m, E[s_N^{Z_N(m)} | T_N = n] against the harmonic-measure limit.
inline ConvergenceReport verify_deathfin(const ModelContext& ctx, const SurvivalTable& table, long long n,
                                         const std::vector<long long>& k_grid, const std::vector<double>& s_grid,
                                         const HarmonicFn& U, double s_lower = 1.0) {
  ConvergenceReport rep;
  rep.experiment = "deathfin";
  rep.model = ctx.name;
  rep.param_names = {"n", "k", "s_N", "s_lower"};
  const std::size_t last = ctx.types() - 1;
  auto h0 = [&](long long j) { return table.q(last, j).v; };
  std::vector<std::pair<long long, double>> grid;
  for (long long k : k_grid)
    for (double sn : s_grid) grid.emplace_back(k, sn);
  rep.rows = parallel_map<ReportRow>(grid.size(), [&](std::size_t idx) {
    const auto [k, sn] = grid[idx];
    const double limit = limit_deathfin(sn, k, U, h0);
    return make_row({double(n), double(k), sn, s_lower},
                    [&] {
                      if (k == 0) return 1.0;  // Z_N(n) = 0 on {T_N = n}
                      const Point s = lower_point(ctx.types(), s_lower, Prob::from_value(sn));
                      return conditional_transform(*ctx.spec, table, s, n - k, n);
                    },
                    limit);
  });
  judge_all_ratios(rep);
  return rep;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  return g;
}

/// Slope within 0.03 of gamma_1; exp(intercept)/D_{N-1} inside the band when one is set.
inline void judge_laplace(ConvergenceReport& rep) {
  if (!rep.precision_clean()) {
    rep.pass = false;
    rep.detail = "precision flag raised";
    return;
  }
  const double slope = rep.summary.at("slope");
  const double ratio = rep.summary.at("intercept_ratio");
  const bool slope_ok = std::abs(slope - rep.summary.at("gamma_1")) <= 0.03;
  const bool icpt_ok = !rep.band || rep.band->contains(ratio);
  rep.pass = slope_ok && icpt_ok;
  rep.detail = "slope " + format_double(slope) + (slope_ok ? " within" : " outside") + " 0.03 of gamma_1; " +
               "exp(intercept)/D = " + format_double(ratio) +
               (rep.band ? (icpt_ok ? " inside band" : " outside band") : "");
}

/// 1 - E[exp(-theta W_N)] against D_{N-1} theta^{gamma_1}; the summary holds the
/// log-log regression slope and exp(intercept)/D_{N-1}.
inline ConvergenceReport verify_laplace_W(const ModelContext& ctx, const std::vector<double>& theta_grid) {
  ConvergenceReport rep;
  rep.experiment = "laplace_w";
  rep.model = ctx.name;
  rep.param_names = {"theta"};
  const double D = ctx.constants.D.back();
  const double gamma = ctx.constants.gamma.front();
  rep.rows = parallel_map<ReportRow>(theta_grid.size(), [&](std::size_t idx) {
    const double th = theta_grid[idx];
    return make_row({th}, [&] { return w_laplace_complement(*ctx.spec, th); }, D * std::pow(th, gamma));
  });
  std::vector<double> lx, ly;
  for (const auto& r : rep.rows) {
    lx.push_back(std::log(r.params[0]));
    ly.push_back(std::log(r.value));
  }
  const auto fit = least_squares(lx, ly);
  rep.summary["slope"] = fit.slope;
  rep.summary["intercept"] = fit.intercept;
  rep.summary["gamma_1"] = gamma;
  rep.summary["log_D"] = std::log(D);
  rep.summary["intercept_ratio"] = std::exp(fit.intercept) / D;
  judge_laplace(rep);
  return rep;
}

/// (b_N lambda n^2 / k)(h_m(s) - h_m(0)) with m = n - k, s = exp(-lambda/(b_N k)).
inline ConvergenceReport verify_diff1(const ModelContext& ctx, const std::vector<std::pair<long long, long long>>& nk,
                                      double lambda) {
  ConvergenceReport rep;
  rep.experiment = "diff1";
  rep.model = ctx.name;
  rep.param_names = {"n", "k", "lambda"};
  const double b = ctx.b_last();
  rep.rows = parallel_map<ReportRow>(nk.size(), [&](std::size_t idx) {
    const auto [n, k] = nk[idx];
    return make_row({double(n), double(k), lambda},
                    [&] {
                      const Prob s = exp_prob(lambda / (b * static_cast<double>(k)));
                      ScalarOrbit orbit{s, Prob::zero(), s.v};
                      advance_last(*ctx.spec, orbit, n - k);
                      const auto nn = static_cast<double>(n);
                      return b * lambda * nn * nn / static_cast<double>(k) * orbit.delta;
                    },
                    1.0);
  });
  rep.pass = rep.precision_clean() && monotone_toward_one([&] {
               std::vector<double> r;
               for (const auto& row : rep.rows) r.push_back(row.ratio);
               return r;
             }());
  rep.detail = rep.pass ? "ratios approach 1 monotonically" : "ratios not monotone toward 1";
  return rep;
}

/// n^{gamma_1 - 1} E[W_N exp(-lambda W_N/(b_N n))] against b_N g_{1,N} / lambda^{1-gamma_1};
/// with `censor` the expectation carries I_{N-1}(n^{2/3}).
inline ConvergenceReport verify_diff2(const ModelContext& ctx, const std::vector<long long>& n_grid, double lambda,
                                      bool censor) {
  ConvergenceReport rep;
  rep.experiment = censor ? "censored_w" : "diff2";
  rep.model = ctx.name;
  rep.param_names = {"n", "lambda", "t"};
  const double b = ctx.b_last();
  const double gamma = ctx.constants.gamma.front();
  const double limit = b * ctx.constants.g.front() / std::pow(lambda, 1.0 - gamma);
  rep.rows = parallel_map<ReportRow>(n_grid.size(), [&](std::size_t idx) {
    const auto n = static_cast<double>(n_grid[idx]);
    const long long t = censor ? std::llround(std::pow(n, 2.0 / 3.0)) : 0;
    return make_row({n, lambda, double(t)},
                    [&] {
                      const double v = censor ? w_weighted_mean_censored(*ctx.spec, b, lambda, n, t)
                                              : w_weighted_mean(*ctx.spec, b, lambda, n);
                      return std::pow(n, gamma - 1.0) * v;
                    },
                    limit);
  });
  judge_final_ratio(rep);
  return rep;
}

/// (n^{1+gamma_1}/k^2) E[Z_N(m) exp(-lambda Z_N(m)/(b_N k)) I_{N-1}(n^{2/3})] against b_N g_{1,N}/lambda^2,
/// m = n - k. The expectation is -b_N k d/dlambda of the censored transform,
/// taken by Richardson-combined central differences computed as paired gaps.
inline double censored_size_weighted(const ModelContext& ctx, long long n, long long k, double lambda, long long t) {
  const double b = ctx.b_last();
  const double scale = b * static_cast<double>(k);
  auto central = [&](double h) {
    const Prob sa = exp_prob((lambda - h) / scale);
    const Prob sb = exp_prob((lambda + h) / scale);
    const double delta = std::exp(-lambda / scale) * 2.0 * std::sinh(h / scale);
    return censored_gap(*ctx.spec, sa, sb, delta, t, n - k) / (2.0 * h);
  };
  const double h = lambda * 1e-4;
  return scale * (4.0 * central(h) - central(2.0 * h)) / 3.0;
}

inline ConvergenceReport verify_diff3(const ModelContext& ctx, const std::vector<long long>& n_grid,
                                      const std::vector<double>& k_exponents, double lambda) {
  ConvergenceReport rep;
  rep.experiment = "diff3";
  rep.model = ctx.name;
  rep.param_names = {"n", "k", "k_exponent", "lambda", "t"};
  const double b = ctx.b_last();
  const double gamma = ctx.constants.gamma.front();
  const double limit = b * ctx.constants.g.front() / (lambda * lambda);
  std::vector<std::pair<long long, double>> grid;
  for (double e : k_exponents)
    for (long long n : n_grid) grid.emplace_back(n, e);
  rep.rows = parallel_map<ReportRow>(grid.size(), [&](std::size_t idx) {
    const auto [n, e] = grid[idx];
    const auto nn = static_cast<double>(n);
    const long long k = std::max(1LL, std::llround(std::pow(nn, e)));
    const long long t = std::llround(std::pow(nn, 2.0 / 3.0));
    return make_row({nn, double(k), e, lambda, double(t)},
                    [&] {
                      const auto kk = static_cast<double>(k);
                      return std::pow(nn, 1.0 + gamma) / (kk * kk) * censored_size_weighted(ctx, n, k, lambda, t);
                    },
                    limit);
  });
  judge_final_ratio(rep);
  return rep;
}

/// P(Z_1(l) + ... + Z_{N-1}(l) > 0 | T_N = n) for l = n^e; should decrease to 0.
inline ConvergenceReport verify_no_previous(const ModelContext& ctx, const SurvivalTable& table,
                                            const std::vector<long long>& n_grid, const std::vector<double>& exponents) {
  ConvergenceReport rep;
  rep.experiment = "no_previous";
  rep.model = ctx.name;
  rep.param_names = {"n", "l", "exponent"};
  std::vector<std::pair<long long, double>> grid;
  for (double e : exponents)
    for (long long n : n_grid) grid.emplace_back(n, e);
  rep.rows = parallel_map<ReportRow>(grid.size(), [&](std::size_t idx) {
    const auto [n, e] = grid[idx];
    const long long l = std::max(1LL, std::llround(std::pow(static_cast<double>(n), e)));
    const Point ones(ctx.types(), Prob::one());
    return make_row({double(n), double(l), e},
                    [&] { return 1.0 - censored_transform(*ctx.spec, &table, ones, l, l, n); }, 0.0);
  });
  rep.pass = rep.precision_clean();
  for (std::size_t i = 1; i < rep.rows.size() && rep.pass; ++i)
    if (rep.rows[i].params[2] == rep.rows[i - 1].params[2] && rep.rows[i].value > rep.rows[i - 1].value)
      rep.pass = false;
  rep.detail = rep.pass ? "probabilities decrease along n" : "probabilities not decreasing";
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

/// CSV with '#' header lines carrying `header` (resolved configuration), one row per grid point.
inline std::string report_csv(const ConvergenceReport& rep, const std::vector<std::string>& header = {}) {
  std::ostringstream out;
  out << "# experiment: " << rep.experiment << "\n# model: " << rep.model << "\n";
  for (const auto& h : header) out << "# " << h << "\n";
  for (const auto& p : rep.param_names) out << p << ",";
  out << "value,limit,ratio,precision_ok\n";
  for (const auto& r : rep.rows) {
    for (double p : r.params) out << format_double(p) << ",";
    out << format_double(r.value) << "," << format_double(r.limit) << "," << format_double(r.ratio) << ","
        << (r.precision_ok ? "1" : "0") << "\n";
  }
  return out.str();
}

inline nlohmann::json report_verdict(const ConvergenceReport& rep) {
  nlohmann::json j;
  j["experiment"] = rep.experiment;
  j["model"] = rep.model;
  j["verdict"] = rep.pass ? "PASS" : "FAIL";
  j["detail"] = rep.detail;
  j["rows"] = rep.rows.size();
  j["precision_clean"] = rep.precision_clean();
  if (!rep.rows.empty()) j["final_ratio"] = rep.last().ratio;
  if (rep.band) j["band"] = {rep.band->lo, rep.band->hi};
  for (const auto& [k, v] : rep.summary) j["summary"][k] = v;
  return j;
}

}  // namespace gwlab
