// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "enumerate.hpp"
#include "support.hpp"

using namespace gwlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds, 0: none
  std::function<Outcome()> run;
};

std::string num(double x) { return format_double(x); }

BandRegistry bands() { return BandRegistry::load(std::string(GWLAB_SOURCE_DIR) + "/config/bands.json"); }

Outcome report_outcome(const ConvergenceReport& rep) {
  if (!rep.band) return {false, "no pre-registered band for " + band_key(rep.experiment, rep.model)};
  return {rep.pass, rep.detail};
}

Outcome geometric_anchor() {
  const auto spec = gwtest::load("geometric1");
  const auto table = build_survival_table(spec, 10000);
  if (table.horizon() < 10000) return {false, "table truncated"};
  double worst = 0.0;
  for (long long n = 1; n <= 10000; ++n) {
    worst = std::max(worst, gwtest::rel_err(table.d(0, n), 1.0 / double(n + 1)));
    worst = std::max(worst, gwtest::rel_err(extinction_time_pmf(table, 0, n), 1.0 / (double(n) * double(n + 1))));
  }
  return {worst <= 1e-10, "max relative error " + num(worst)};
}

Outcome harmonic() {
  const auto spec = gwtest::load("geometric1");
  double worst_u = 0.0, worst_id = 0.0;
  for (int j = 1; j <= 8; ++j) {
    const double s = 0.1 * j;
    const double u = harmonic_U(spec, 1.0, s, 10000).value;
    const double uh = harmonic_U(spec, 1.0, apply_last(spec, Prob::from_value(s)).v, 10000).value;
    worst_u = std::max(worst_u, gwtest::rel_err(u, s / (1 - s)));
    worst_id = std::max(worst_id, std::abs(uh - u - 1.0));
  }
  return {worst_u <= 1e-3 && worst_id <= 2e-3,
          "max relative error of U " + num(worst_u) + ", max identity error " + num(worst_id)};
}

Outcome run_banded(const std::string& model, const std::string& id, const ExperimentParams& p) {
  const auto spec = gwtest::load(model);
  const auto ctx = ModelContext::make(model, spec);
  const auto reg = bands();
  const auto rep = run_experiment(ctx, id, p, &reg);
  auto out = report_outcome(rep);
  std::ostringstream ratios;
  for (const auto& r : rep.rows) ratios << " " << num(r.ratio);
  out.detail += "; ratios:" + ratios.str();
  return out;
}

Outcome local_trend() {
  auto p = default_params("local");
  p.n_grid = {100, 316, 1000, 3162, 10000};
  return run_banded("zoo2", "local", p);
}

Outcome death() {
  auto p = default_params("death");
  p.n = 20000;
  p.k = {200};
  p.lambda = {0.5, 1.0, 2.0};
  return run_banded("zoo2", "death", p);
}

Outcome finalstage() {
  auto p = default_params("finalstage");
  p.n = 20000;
  p.x = {0.25, 0.5, 0.75};
  p.lambda = {1.0};
  auto out = run_banded("zoo2", "finalstage", p);
  // normalization as lambda -> 0
  const auto spec = gwtest::load("zoo2");
  const auto ctx = ModelContext::make("zoo2", spec);
  const auto table = build_survival_table(spec, 20000);
  const auto norm = verify_finalstage(ctx, table, 20000, p.x, 1e-12);
  double worst = 0.0;
  for (const auto& r : norm.rows) worst = std::max(worst, std::abs(r.value - 1.0));
  out.pass = out.pass && worst <= 1e-9;
  out.detail += "; normalization error " + num(worst);
  return out;
}

Outcome deathfin() {
  auto p = default_params("deathfin");
  p.n = 20000;
  p.k = {0, 1, 2, 5};
  p.s = {0.3, 0.6, 0.9};
  auto out = run_banded("zoo2", "deathfin", p);
  // geometric anchor, both sides in closed form
  auto h = [](long long n, double s) { return (n - (n - 1) * s) / (n + 1 - n * s); };
  const HarmonicFn U = [](double s) { return s / (1 - s); };
  const auto h0 = [](long long k) { return double(k) / double(k + 1); };
  const long long n = 20000;
  double worst = 0.0;
  for (long long k : p.k) {
    for (double s : p.s) {
      const long long m = n - k;
      const double exact =
          k == 0 ? 1.0 : (h(m, s * h0(k)) - h(m, s * h0(k - 1))) * double(n) * double(n + 1);
      worst = std::max(worst, std::abs(exact - limit_deathfin(s, k, U, h0)));
    }
  }
  out.pass = out.pass && worst <= 1e-3;
  out.detail += "; geometric closed-form gap " + num(worst);
  return out;
}

Outcome laplace_slope() {
  auto p = default_params("laplace_w");
  p.theta_min = 1e-5;
  p.theta_max = 1e-2;
  const auto spec = gwtest::load("zoo2");
  const auto ctx = ModelContext::make("zoo2", spec);
  const auto reg = bands();
  const auto rep = run_experiment(ctx, "laplace_w", p, &reg);
  auto out = report_outcome(rep);
  out.detail += "; log D_1 = " + num(rep.summary.at("log_D")) + ", intercept = " + num(rep.summary.at("intercept"));
  return out;
}

Outcome mc_vs_exact() {
  const auto spec = gwtest::load("zoo2");
  const auto table = build_survival_table(spec, 30);
  SimConfig cfg;
  cfg.master_seed = 20240601;
  cfg.replicates = 1'000'000;
  cfg.max_steps = 30;
  const auto est = estimate_pmf_T(spec, cfg);
  double worst_z = 0.0;
  bool ok = true;
  for (long long n = 1; n <= 30; ++n) {
    const double exact = extinction_time_pmf(table, 0, n);
    const double sigma = std::sqrt(exact * (1 - exact) / double(cfg.replicates));
    const double z = std::abs(est.pmf[n].estimate - exact) / sigma;
    worst_z = std::max(worst_z, z);
    ok = ok && z <= 4.0;
  }
  cfg.replicates = 10'000'000;
  cfg.master_seed = 20240602;
  cfg.snapshot_times = {20};
  const double s = 0.7;
  const auto ce = conditional_estimate(
      spec, cfg, 25, [s](const TrajectorySummary& tr) { return std::pow(s, double(tr.snapshots[0][1])); });
  const Point sp{Prob::one(), Prob::from_value(s)};
  const double exact = conditional_transform(spec, table, sp, 20, 25);
  const double zc = std::abs(ce.estimate - exact) / ce.std_error;
  ok = ok && zc <= 4.0;
  return {ok, "pmf max |z| " + num(worst_z) + " over n <= 30; conditional |z| " + num(zc) + " (" +
                  std::to_string(ce.replicates) + " accepted)"};
}

Outcome exhaustive() {
  const auto spec = gwtest::load("micro2");
  const auto table = build_survival_table(spec, 8);
  const auto en = gwtest::enumerate_two_type(spec, 8);
  double worst = 0.0;
  for (long long n = 1; n <= 8; ++n)
    worst = std::max(worst, std::abs(extinction_time_pmf(table, 0, n) - (en.extinct[n] - en.extinct[n - 1])));
  return {worst <= 1e-9 && en.dropped < 1e-12, "max abs difference " + num(worst) + ", pruned mass " + num(en.dropped)};
}

Outcome properties() {
  const std::string cmd = std::string("\"") + GWLAB_PROPERTY_BIN + "\" > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, "randomized property suite (1000 cases per property) exit status " + std::to_string(rc)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form anchor", 1.0, geometric_anchor},
      {2, "harmonic measure", 0.0, harmonic},
      {3, "local limit trend (zoo2)", 30.0, local_trend},
      {4, "death-regime transform (zoo2)", 120.0, death},
      {5, "final-stage transform (zoo2)", 0.0, finalstage},
      {6, "fixed-k transform (zoo2, geometric anchor)", 0.0, deathfin},
      {7, "W transform slope (zoo2)", 0.0, laplace_slope},
      {8, "Monte Carlo vs exact", 300.0, mc_vs_exact},
      {9, "exhaustive enumeration (micro2)", 0.0, exhaustive},
      {10, "randomized property suites", 0.0, properties},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char tbuf[32];
    std::snprintf(tbuf, sizeof tbuf, "%.3f s", secs);
    std::string timing = tbuf;
    if (c.time_limit > 0 && secs >= c.time_limit) {
      out.pass = false;
      timing += " (limit " + num(c.time_limit) + " s exceeded)";
    } else if (c.time_limit > 0) {
      timing += " (limit " + num(c.time_limit) + " s)";
    }
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %d: %s: %s [%s]\n", out.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                out.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
