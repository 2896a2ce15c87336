#include <catch_amalgamated.hpp>

#include <clocale>
#include <random>

#include "support.hpp"

using namespace gwlab;

TEST_CASE("value/complement product keeps the complement accurate") {
  const Prob a = Prob::from_complement(1e-12);
  const Prob b = Prob::from_complement(3e-12);
  const Prob p = times(a, b);
  CHECK(p.c == Catch::Approx(4e-12).epsilon(1e-9));
  CHECK(times(Prob::one(), b).c == b.c);
  CHECK(times(Prob::zero(), b).v == 0.0);
}

TEST_CASE("log_value switches branch without losing precision") {
  CHECK(Prob::from_complement(1e-15).log_value() == Catch::Approx(-1e-15).epsilon(1e-12));
  CHECK(Prob::from_value(0.25).log_value() == Catch::Approx(std::log(0.25)));
}

TEST_CASE("power_gap matches direct differences away from cancellation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = u(rng), b = u(rng);
    for (long long k : {0LL, 1LL, 2LL, 5LL, 64LL, 65LL, 300LL}) {
      const double direct = std::pow(a, double(k)) - std::pow(b, double(k));
      CHECK(power_gap(a, b, a - b, k) == Catch::Approx(direct).margin(1e-13).epsilon(1e-10));
    }
  }
}

TEST_CASE("power_gap resolves gaps far below the operands' resolution") {
  const double b = 0.5, delta = 1e-20;
  // d/dx x^3 at 0.5 = 0.75
  CHECK(power_gap(b + delta, b, delta, 3) == Catch::Approx(0.75e-20).epsilon(1e-12));
  CHECK(power_gap(b + delta, b, delta, 100) == Catch::Approx(100 * std::pow(0.5, 99) * 1e-20).epsilon(1e-9));
}

TEST_CASE("power_complement") {
  CHECK(power_complement(Prob::from_complement(1e-10), 3) == Catch::Approx(3e-10).epsilon(1e-9));
  CHECK(power_complement(Prob::from_value(0.5), 2) == Catch::Approx(0.75));
  CHECK(power_complement(Prob::from_value(0.5), 0) == 0.0);
}

TEST_CASE("compensated sum recovers small terms") {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-17;
  s += -1.0;
  CHECK(s.value() == Catch::Approx(1e-14).epsilon(1e-6));
}

TEST_CASE("format_double prints 17 significant digits independent of locale") {
  std::setlocale(LC_ALL, "de_DE.UTF-8");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  std::setlocale(LC_ALL, "C");
}
