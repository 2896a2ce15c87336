#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace gwlab;

namespace {

bool same(const TrajectorySummary& a, const TrajectorySummary& b) {
  return a.extinction_time == b.extinction_time && a.cap_exceeded == b.cap_exceeded && a.steps == b.steps &&
         a.snapshots == b.snapshots && a.w_total == b.w_total && a.lower_extinction_time == b.lower_extinction_time;
}

}  // namespace

TEST_CASE("config validation names the field") {
  SimConfig cfg;
  cfg.replicates = 0;
  CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("replicates"));
  cfg = {};
  cfg.max_steps = 0;
  CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("max_steps"));
  cfg = {};
  cfg.population_cap = 0;
  CHECK_THROWS_WITH(cfg.validate(), Catch::Matchers::ContainsSubstring("population_cap"));
}

TEST_CASE("certain death at the first generation") {
  const ProcessSpec spec({OffspringLaw{0, ProductForm{{{0, PointMass{0}}}}}});
  SimConfig cfg;
  for (std::uint64_t r = 0; r < 100; ++r) {
    const auto tr = simulate_once(spec, cfg, r);
    REQUIRE(tr.extinction_time);
    CHECK(*tr.extinction_time == 1);
  }
}

TEST_CASE("replay is deterministic") {
  const auto spec = gwtest::load("zoo3");
  SimConfig cfg;
  cfg.master_seed = 77;
  cfg.snapshot_times = {0, 3, 10};
  for (std::uint64_t r = 0; r < 200; ++r) CHECK(same(simulate_once(spec, cfg, r), simulate_once(spec, cfg, r)));
}

TEST_CASE("population cap censors the run") {
  const ProcessSpec spec({OffspringLaw{0, ProductForm{{{0, PointMass{2}}}}}});
  SimConfig cfg;
  cfg.population_cap = 1000;
  const auto tr = simulate_once(spec, cfg, 0);
  CHECK(tr.cap_exceeded);
  CHECK(tr.censored());
  CHECK(tr.steps == 10);
}

TEST_CASE("snapshots after extinction are zero; Z(T) = 0") {
  const auto spec = gwtest::load("zoo2");
  SimConfig cfg;
  cfg.snapshot_times = {0, 1, 2, 5, 50};
  cfg.max_steps = 100000;
  for (std::uint64_t r = 0; r < 500; ++r) {
    const auto tr = simulate_once(spec, cfg, r);
    CHECK(tr.snapshots[0] == std::vector<std::int64_t>{1, 0});
    if (tr.extinction_time && *tr.extinction_time <= 50)
      CHECK(tr.snapshots[4] == std::vector<std::int64_t>{0, 0});
    CHECK(tr.w_total >= 0);
  }
}

TEST_CASE("geometric: P(T = 1) = 1/2") {
  const auto spec = gwtest::load("geometric1");
  SimConfig cfg;
  cfg.replicates = 1'000'000;
  cfg.max_steps = 30;
  const auto est = estimate_pmf_T(spec, cfg);
  CHECK(std::abs(est.pmf[1].estimate - 0.5) < 0.002);
  CHECK(est.total_mass() <= 1.0);
  for (long long n = 1; n <= 30; ++n) {
    const double exact = 1.0 / (double(n) * double(n + 1));
    CHECK(std::abs(est.pmf[n].estimate - exact) <= 4.0 * std::sqrt(exact * (1 - exact) / 1e6));
  }
  CHECK(est.censored == static_cast<std::uint64_t>(std::llround((1.0 - est.total_mass()) * 1e6)));
}

TEST_CASE("aggregate results do not depend on the worker count") {
  const auto spec = gwtest::load("zoo2");
  SimConfig cfg;
  cfg.master_seed = 5;
  cfg.replicates = 3 * 4096 + 17;
  cfg.max_steps = 40;
  cfg.workers = 1;
  const auto a = estimate_pmf_T(spec, cfg);
  cfg.workers = 4;
  const auto b = estimate_pmf_T(spec, cfg);
  for (std::size_t n = 0; n < a.pmf.size(); ++n) CHECK(a.pmf[n].estimate == b.pmf[n].estimate);

  cfg.snapshot_times = {4};
  auto f = [](const TrajectorySummary& tr) { return std::pow(0.5, double(tr.snapshots[0][1])); };
  cfg.workers = 1;
  const auto c1 = conditional_estimate(spec, cfg, 8, f);
  cfg.workers = 3;
  const auto c3 = conditional_estimate(spec, cfg, 8, f);
  CHECK(c1.estimate == c3.estimate);
  CHECK(c1.std_error == c3.std_error);

  cfg.workers = 1;
  const auto w1 = sample_w(spec, cfg);
  cfg.workers = 2;
  CHECK(w1.values == sample_w(spec, cfg).values);
}

TEST_CASE("conditional estimate: constant functional and rejection errors") {
  const auto spec = gwtest::load("zoo2");
  SimConfig cfg;
  cfg.replicates = 20000;
  const auto one = conditional_estimate(spec, cfg, 5, [](const TrajectorySummary&) { return 1.0; });
  CHECK(one.estimate == 1.0);
  CHECK(one.std_error == 0.0);
  CHECK(one.acceptance_rate > 0.0);
  CHECK(one.acceptance_rate <= 1.0);
  cfg.replicates = 100;
  CHECK_THROWS_AS(conditional_estimate(spec, cfg, 5000, [](const TrajectorySummary&) { return 1.0; }),
                  AcceptanceTooLow);
}

TEST_CASE("conservation and W accounting along trajectories") {
  const auto spec = gwtest::load("zoo3");
  SimConfig cfg;
  cfg.master_seed = 11;
  cfg.max_steps = 2000;
  const std::size_t n = spec.types();
  for (std::uint64_t r = 0; r < 2000; ++r) {
    std::int64_t w_seen = 0;
    bool conserved = true;
    const auto tr = simulate_once(spec, cfg, r,
                                  [&](long long, const std::vector<std::int64_t>& z_before,
                                      const std::vector<std::int64_t>& blocks, const std::vector<std::int64_t>& z_after) {
                                    for (std::size_t j = 0; j < n; ++j) {
                                      std::int64_t col = 0;
                                      for (std::size_t i = 0; i < n; ++i) {
                                        col += blocks[i * n + j];
                                        // children only from present parents, only of types >= parent
                                        if (z_before[i] == 0 && blocks[i * n + j] != 0) conserved = false;
                                        if (j < i && blocks[i * n + j] != 0) conserved = false;
                                      }
                                      if (col != z_after[j]) conserved = false;
                                    }
                                    for (std::size_t i = 0; i + 1 < n; ++i) w_seen += blocks[i * n + n - 1];
                                  });
    REQUIRE(conserved);
    CHECK(tr.w_total == w_seen);
    CHECK(tr.w_total == tr.w_check);
  }
}

TEST_CASE("W sample: zero mass matches the fixed point") {
  const auto spec = gwtest::load("zoo2");
  SimConfig cfg;
  cfg.replicates = 1'000'000;
  cfg.max_steps = 1'000'000;
  const auto ws = sample_w(spec, cfg);
  REQUIRE(ws.values.size() == cfg.replicates);
  double zeros = 0;
  for (auto v : ws.values) zeros += v == 0;
  const double p = w_transform_value(spec, 0.0);
  CHECK(std::abs(zeros / 1e6 - p) <= 4.0 * std::sqrt(p * (1 - p) / 1e6));

  // E[W exp(-lambda W/(b n))] with lambda = 1, n = 100
  double sum = 0, sumsq = 0;
  for (auto v : ws.values) {
    const double x = double(v) * std::exp(-double(v) / 100.0);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / 1e6;
  const double se = std::sqrt((sumsq / 1e6 - mean * mean) / 1e6);
  CHECK(std::abs(mean - w_weighted_mean(spec, 1.0, 1.0, 100.0)) <= 4.0 * se);
}
