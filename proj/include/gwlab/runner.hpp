#pragma once

// Named experiments with default grids, band lookup, verdicts and pilot
// runs. Shared by the command-line tool and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwlab/experiments.hpp"

namespace gwlab {

struct ExperimentParams {
  std::vector<long long> n_grid;     // foster, local, diff2, censored_w, diff3, no_previous
  long long n = 0;                   // finalstage, death, deathfin
  std::vector<long long> k;          // death, deathfin, diff1 (paired with n_grid)
  std::vector<double> lambda;        // first entry used where a single lambda is needed
  std::vector<double> x;             // finalstage
  std::vector<double> s;             // deathfin
  std::vector<double> exponents;     // diff3: k = n^e;  no_previous: l = n^e
  double s_lower = 1.0;
  std::size_t type = 0;              // foster, local (0-based)
  double theta_min = 1e-5;
  double theta_max = 1e-2;
  std::size_t points = 13;
  long long harmonic_n = 1LL << 20;  // deathfin: n used to evaluate U

  nlohmann::json to_json() const {
    return {{"n_grid", n_grid}, {"n", n},           {"k", k},
            {"lambda", lambda}, {"x", x},           {"s", s},
            {"exponents", exponents}, {"s_lower", s_lower}, {"type", type + 1},
            {"theta_min", theta_min}, {"theta_max", theta_max}, {"points", points},
            {"harmonic_n", harmonic_n}};
  }
};

inline const std::vector<std::string>& theorem_ids() {
  static const std::vector<std::string> ids{"finalstage", "death", "deathfin", "foster", "local"};
  return ids;
}

inline const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids{"laplace_w", "diff1", "diff2", "diff3", "censored_w", "no_previous"};
  return ids;
}

inline bool is_known_experiment(const std::string& id) {
  const auto& t = theorem_ids();
  const auto& l = lemma_ids();
  return std::find(t.begin(), t.end(), id) != t.end() || std::find(l.begin(), l.end(), id) != l.end();
}

inline ExperimentParams default_params(const std::string& id) {
  ExperimentParams p;
  p.lambda = {1.0};
  if (id == "foster" || id == "local") {
    p.n_grid = {100, 316, 1000, 3162, 10000};
  } else if (id == "finalstage") {
    p.n = 20000;
    p.x = {0.25, 0.5, 0.75};
  } else if (id == "death") {
    p.n = 20000;
    p.k = {200};
    p.lambda = {0.5, 1.0, 2.0};
  } else if (id == "deathfin") {
    p.n = 20000;
    p.k = {0, 1, 2, 5};
    p.s = {0.3, 0.6, 0.9};
  } else if (id == "laplace_w") {
  } else if (id == "diff1") {
    p.n_grid = {1000, 10000, 20000};
    p.k = {31, 100, 141};
  } else if (id == "diff2" || id == "censored_w") {
    p.n_grid = {1000, 10000, 20000};
  } else if (id == "diff3") {
    p.n_grid = {1000, 5000, 20000};
    p.exponents = {0.25, 1.0 / 3.0, 0.5};
  } else if (id == "no_previous") {
    p.n_grid = {1000, 5000, 20000};
    p.exponents = {0.6, 0.75};
  } else {
    throw std::invalid_argument("unknown experiment '" + id + "'");
  }
  return p;
}

/// Pilot grid: every n halved, the theta range doubled.
inline ExperimentParams pilot_params(ExperimentParams p) {
  for (auto& n : p.n_grid) n = std::max(2LL, n / 2);
  if (p.n > 0) p.n = std::max(2LL, p.n / 2);
  p.theta_min *= 2.0;
  p.theta_max *= 2.0;
  return p;
}

inline std::string band_key(const std::string& id, const std::string& model) { return id + "/" + model; }

/// Largest n the experiment touches in the survival table.
inline long long table_horizon(const std::string& id, const ExperimentParams& p) {
  long long h = std::max(p.n, 1LL);
  for (long long n : p.n_grid) h = std::max(h, n);
  (void)id;
  return h;
}

inline std::vector<double> ratios_from(const ConvergenceReport& rep, long long min_n = 0) {
  std::vector<double> r;
  for (const auto& row : rep.rows)
    if (row.params.empty() || row.params[0] >= double(min_n)) r.push_back(row.ratio);
  return r;
}

/// Applies the experiment's verdict rule to a report whose band is already set.
inline void judge(const std::string& id, ConvergenceReport& rep) {
  if (id == "foster" || id == "local") {
    judge_final_ratio(rep);
    if (rep.pass && !monotone_toward_one(ratios_from(rep, 100))) {
      rep.pass = false;
      rep.detail = "ratios not monotone toward 1 for n >= 100";
    } else if (rep.pass) {
      rep.detail += "; monotone toward 1 for n >= 100";
    }
  } else if (id == "finalstage" || id == "death" || id == "deathfin" || id == "diff3") {
    judge_all_ratios(rep);
  } else if (id == "diff2" || id == "censored_w") {
    judge_final_ratio(rep);
  } else if (id == "laplace_w") {
    judge_laplace(rep);
  }
  // diff1 and no_previous carry trend verdicts set by their drivers
}

inline ConvergenceReport run_experiment(const ModelContext& ctx, const std::string& id, const ExperimentParams& p,
                                        const BandRegistry* bands = nullptr) {
  if (!is_known_experiment(id)) throw std::invalid_argument("unknown experiment '" + id + "'");
  const bool needs_table =
      id == "foster" || id == "local" || id == "finalstage" || id == "death" || id == "deathfin" || id == "no_previous";
  SurvivalTable table;
  if (needs_table) {
    table = build_survival_table(*ctx.spec, table_horizon(id, p));
    if (table.precision_loss_at()) throw PrecisionLoss(*table.precision_loss_at(), "survival table truncated");
  }
  ConvergenceReport rep;
  if (id == "foster") {
    rep = verify_foster(ctx, table, p.type, p.n_grid);
  } else if (id == "local") {
    rep = verify_local(ctx, table, p.type, p.n_grid);
  } else if (id == "finalstage") {
    rep = verify_finalstage(ctx, table, p.n, p.x, p.lambda.front(), p.s_lower);
  } else if (id == "death") {
    rep = verify_death(ctx, table, p.n, p.k, p.lambda, p.s_lower);
  } else if (id == "deathfin") {
    rep = verify_deathfin(ctx, table, p.n, p.k, p.s, harmonic_evaluator(*ctx.spec, ctx.b_last(), p.harmonic_n),
                          p.s_lower);
  } else if (id == "laplace_w") {
    rep = verify_laplace_W(ctx, log_grid(p.theta_min, p.theta_max, p.points));
  } else if (id == "diff1") {
    if (p.k.size() != p.n_grid.size()) throw std::invalid_argument("diff1 needs one k per n");
    std::vector<std::pair<long long, long long>> nk;
    for (std::size_t i = 0; i < p.k.size(); ++i) nk.emplace_back(p.n_grid[i], p.k[i]);
    rep = verify_diff1(ctx, nk, p.lambda.front());
  } else if (id == "diff2" || id == "censored_w") {
    rep = verify_diff2(ctx, p.n_grid, p.lambda.front(), id == "censored_w");
  } else if (id == "diff3") {
    rep = verify_diff3(ctx, p.n_grid, p.exponents, p.lambda.front());
  } else {
    rep = verify_no_previous(ctx, table, p.n_grid, p.exponents);
  }
  if (bands) rep.band = bands->find(band_key(id, ctx.name));
  judge(id, rep);
  return rep;
}

/// Deviation the pilot contributes to the band rule.
inline std::optional<double> pilot_ratio(const std::string& id, const ConvergenceReport& rep) {
  if (id == "laplace_w") return rep.summary.at("intercept_ratio");
  if (id == "diff1" || id == "no_previous") return std::nullopt;  // trend verdicts only
  if (id == "foster" || id == "local" || id == "diff2" || id == "censored_w") return rep.last().ratio;
  double worst = 1.0;
  for (const auto& r : rep.rows)
    if (std::abs(r.ratio - 1.0) > std::abs(worst - 1.0)) worst = r.ratio;
  return worst;
}

/// Runs the pilot for `id` and records the band in `reg`. Returns false when the
/// experiment has no band (trend verdict) or the pilot was not precision-clean.
inline bool register_pilot(const ModelContext& ctx, const std::string& id, const ExperimentParams& target,
                           BandRegistry& reg) {
  const auto pilot = pilot_params(target);
  const auto rep = run_experiment(ctx, id, pilot);
  if (!rep.precision_clean()) return false;
  const auto r = pilot_ratio(id, rep);
  if (!r) return false;
  const Band band = band_from_pilot(*r);
  reg.set(band_key(id, ctx.name), band,
          {{"pilot_ratio", *r}, {"pilot_params", pilot.to_json()}, {"target_params", target.to_json()}});
  return true;
}

}  // namespace gwlab
