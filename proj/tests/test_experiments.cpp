#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace gwlab;

TEST_CASE("limit formulas") {
  CHECK(limit_finalstage(1.0, 0.5, 2) == Catch::Approx(std::pow(1.5 / 1.25, -0.5) / (1.25 * 1.25)));
  CHECK(limit_finalstage(1.0, 0.5, 2) == Catch::Approx(0.58424).epsilon(1e-5));
  for (std::size_t n : {1u, 2u, 3u, 5u}) {
    const double lam = 0.7;
    const double expo = -1.0 + std::ldexp(1.0, -static_cast<int>(n - 1));
    CHECK(limit_finalstage(lam, 1e-12, n) == Catch::Approx(std::pow(1 + lam, expo)).epsilon(1e-9));
    CHECK(limit_finalstage(1e-12, 0.3, n) == Catch::Approx(1.0).epsilon(1e-9));
  }
  CHECK(limit_death(1.0) == 0.25);
  CHECK(limit_death(3.0) == 1.0 / 16.0);
  CHECK(limit_death(1e-12) == Catch::Approx(1.0));
}

TEST_CASE("geometric anchor drivers") {
  const auto spec = gwtest::load("geometric1");
  const auto ctx = ModelContext::make("geometric1", spec);
  const auto table = build_survival_table(spec, 10000);
  const std::vector<long long> grid{100, 316, 1000, 3162, 10000};
  const auto foster = verify_foster(ctx, table, 0, grid);
  const auto local = verify_local(ctx, table, 0, grid);
  REQUIRE(foster.rows.size() == grid.size());
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const double n = double(grid[r]);
    CHECK(foster.rows[r].params[0] == n);
    CHECK(foster.rows[r].ratio == Catch::Approx(n / (n + 1)).epsilon(1e-10));
    CHECK(local.rows[r].ratio == Catch::Approx(n / (n + 1)).epsilon(1e-10));
  }
}

TEST_CASE("diff1 on the geometric anchor") {
  // (b lambda n^2/k)(h_m(s) - h_m(0)) with h_m(s) - h_m(0) = s/((m+1-ms)(m+1))
  const auto spec = gwtest::load("geometric1");
  const auto ctx = ModelContext::make("geometric1", spec);
  const auto rep = verify_diff1(ctx, {{1000, 31}, {10000, 100}}, 1.0);
  for (const auto& r : rep.rows) {
    const double n = r.params[0], k = r.params[1], m = n - k;
    const double s = std::exp(-1.0 / k);
    CHECK(r.value == Catch::Approx(n * n / k * s / ((m + 1 - m * s) * (m + 1))).epsilon(1e-9));
  }
  CHECK(rep.pass);
}

TEST_CASE("normalization: lambda -> 0 gives 1") {
  const auto spec = gwtest::load("zoo2");
  const auto ctx = ModelContext::make("zoo2", spec);
  const auto table = build_survival_table(spec, 2000);
  const auto fs = verify_finalstage(ctx, table, 2000, {0.25, 0.5, 0.75}, 1e-12);
  for (const auto& r : fs.rows) CHECK(std::abs(r.value - 1.0) <= 1e-9);
  const auto d = verify_death(ctx, table, 2000, {20}, {1e-12});
  CHECK(std::abs(d.rows[0].value - 1.0) <= 1e-9);
}

TEST_CASE("final-stage and death regimes meet") {
  // x = 1 - k/n with lambda against the death driver at lambda k/n
  const auto spec = gwtest::load("zoo2");
  const auto ctx = ModelContext::make("zoo2", spec);
  const long long n = 20000, k = 200;
  const auto table = build_survival_table(spec, n);
  const double lambda = 50.0;
  const auto fs = verify_finalstage(ctx, table, n, {1.0 - double(k) / double(n)}, lambda);
  const auto d = verify_death(ctx, table, n, {k}, {lambda * double(k) / double(n)});
  CHECK(fs.rows[0].value == Catch::Approx(d.rows[0].value).epsilon(1e-9));
  // and both limits agree to the accuracy of either regime
  CHECK(fs.rows[0].limit == Catch::Approx(d.rows[0].limit).epsilon(0.03));
  CHECK(fs.rows[0].ratio == Catch::Approx(1.0).epsilon(0.03));
  CHECK(d.rows[0].ratio == Catch::Approx(1.0).epsilon(0.03));
}

TEST_CASE("lower-type arguments do not move the final-stage limit") {
  const auto spec = gwtest::load("zoo3");
  const auto ctx = ModelContext::make("zoo3", spec);
  const auto table = build_survival_table(spec, 20000);
  const auto a = verify_finalstage(ctx, table, 20000, {0.25, 0.5, 0.75}, 1.0, 1.0);
  const auto b = verify_finalstage(ctx, table, 20000, {0.25, 0.5, 0.75}, 1.0, 0.5);
  for (std::size_t r = 0; r < a.rows.size(); ++r) CHECK(b.rows[r].value == Catch::Approx(a.rows[r].value).epsilon(1e-3));
}

TEST_CASE("verdicts") {
  ConvergenceReport rep;
  rep.rows.push_back({{1.0}, 1.02, 1.0, 1.02, true});
  judge_final_ratio(rep);
  CHECK(rep.pass);
  rep.band = Band{0.99, 1.01};
  judge_final_ratio(rep);
  CHECK_FALSE(rep.pass);
  rep.band = Band{0.95, 1.05};
  rep.rows.push_back({{2.0}, std::nan(""), 1.0, std::nan(""), false});
  judge_final_ratio(rep);
  CHECK_FALSE(rep.pass);
  CHECK(monotone_toward_one({1.1, 1.05, 1.01}));
  CHECK(monotone_toward_one({0.9, 0.95, 0.99}));
  CHECK_FALSE(monotone_toward_one({0.9, 1.05, 1.01}));
  CHECK(band_from_pilot(1.01).lo == Catch::Approx(1 - 0.025));
}

TEST_CASE("precision flags propagate into rows") {
  const auto row = make_row({1.0}, []() -> double { throw PrecisionLoss(3, "test"); }, 2.0);
  CHECK_FALSE(row.precision_ok);
  CHECK(std::isnan(row.value));
}

TEST_CASE("CSV and verdict serialization") {
  ConvergenceReport rep;
  rep.experiment = "local";
  rep.model = "zoo2";
  rep.param_names = {"n"};
  rep.rows.push_back({{100.0}, 0.1, 0.3, 1.0 / 3.0, true});
  rep.pass = true;
  const auto csv = report_csv(rep, {"seed: 1"});
  CHECK(csv ==
        "# experiment: local\n# model: zoo2\n# seed: 1\nn,value,limit,ratio,precision_ok\n"
        "100,0.10000000000000001,0.29999999999999999,0.33333333333333331,1\n");
  const auto j = report_verdict(rep);
  CHECK(j["verdict"] == "PASS");
  CHECK(j["rows"] == 1);
}

TEST_CASE("band registry round trip") {
  BandRegistry reg;
  reg.set_rule(kBandRule);
  reg.set("death/zoo2/lambda=1", Band{0.9, 1.1}, {{"pilot_ratio", 1.01}});
  const std::string path = "band_roundtrip.json";
  {
    std::ofstream out(path);
    out << reg.dump();
  }
  const auto back = BandRegistry::load(path);
  REQUIRE(back.find("death/zoo2/lambda=1"));
  CHECK(back.find("death/zoo2/lambda=1")->hi == 1.1);
  CHECK_FALSE(back.find("missing"));
  std::remove(path.c_str());
}
