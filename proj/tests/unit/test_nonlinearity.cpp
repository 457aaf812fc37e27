#include <doctest.h>

#include <cmath>

#include "rpl/errors.hpp"
#include "rpl/nonlinearity.hpp"

using namespace rpl;

TEST_CASE("evaluate: quintic, cubic and rational examples") {
  auto q = Nonlinearity::polynomial({0.0, -1.0}).evaluate(2.0, 2);
  CHECK(q[0] == doctest::Approx(-4.0));
  CHECK(q[1] == doctest::Approx(-4.0));
  CHECK(q[2] == doctest::Approx(-2.0));
  auto c = Nonlinearity::polynomial({-1.0}).evaluate(3.0, 2);
  CHECK(c[0] == doctest::Approx(-3.0));
  CHECK(c[1] == doctest::Approx(-1.0));
  CHECK(c[2] == doctest::Approx(0.0));
  auto r = Nonlinearity::rational({0.0, -1.0}, {1.0, 1.0}).evaluate(1.0, 2);
  CHECK(r[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(r[2] == doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("evaluate: errors") {
  auto g = Nonlinearity::polynomial({0.0, -1.0});
  CHECK_THROWS_AS(g.evaluate(1.0, 5), Error);
  try {
    g.evaluate(1.0, 5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedOrder);
  }
  auto pole = Nonlinearity::rational({-1.0}, {1.0, -1.0});
  try {
    pole.evaluate(1.0, 1);
    FAIL("no pole error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Pole);
  }
  CHECK_THROWS_AS(Nonlinearity::rational({-1.0}, {2.0, 1.0}), Error);
  CHECK_THROWS_AS(g.evaluate(-1.0, 1), Error);
}

TEST_CASE("derivatives agree with centered differences of the previous order") {
  auto g = Nonlinearity::rational({0.3, -1.0, 0.2}, {1.0, 0.7, 0.4});
  for (double s : {0.05, 0.5, 2.0, 7.0}) {
    auto v = g.evaluate(s, 4);
    double prev = 1e300;
    for (double h : {1e-2, 5e-3}) {
      auto p = g.evaluate(s + h, 4), m = g.evaluate(s - h, 4);
      double worst = 0.0;
      for (int n = 1; n <= 4; ++n) worst = std::max(worst, std::abs((p[n - 1] - m[n - 1]) / (2 * h) - v[n]));
      CHECK(worst < 4.0 * h * h * (1 + std::abs(v[4]) + 10));
      CHECK(worst < prev);
      prev = worst;
    }
  }
}

TEST_CASE("value, derivative, primitive and secant means are consistent") {
  for (auto g : {Nonlinearity::polynomial({-1.0, -3.0}), Nonlinearity::saturated_quintic(1.0)}) {
    for (double s : {0.1, 1.0, 3.0}) {
      auto v = g.evaluate(s, 1);
      CHECK(g.value(s) == doctest::Approx(v[0]).epsilon(1e-13));
      CHECK(g.derivative(s) == doctest::Approx(v[1]).epsilon(1e-13));
      double h = 1e-5;
      CHECK((g.primitive(s + h) - g.primitive(s - h)) / (2 * h) == doctest::Approx(g.value(s)).epsilon(1e-8));
    }
    double s0 = 0.3, s1 = 1.1, mean = 0, dmean = 0;
    g.secant_pair(s0, s1, mean, dmean);
    CHECK(mean == doctest::Approx((g.primitive(s1) - g.primitive(s0)) / (s1 - s0)).epsilon(1e-12));
    CHECK(g.secant(s0, s1) == doctest::Approx(mean).epsilon(1e-12));
    double h = 1e-6, mp, mm, dd;
    g.secant_pair(s0, s1 + h, mp, dd);
    g.secant_pair(s0, s1 - h, mm, dd);
    CHECK((mp - mm) / (2 * h) == doctest::Approx(dmean).epsilon(1e-7));
  }
}

TEST_CASE("growth report examples") {
  auto s = default_growth_samples();
  CHECK(growth_report(Nonlinearity::polynomial({0.0, -1.0}), s).pass);
  auto cubic = growth_report(Nonlinearity::polynomial({-1.0}), s);
  CHECK_FALSE(cubic.pass);
  CHECK(cubic.flagged[1]);
  CHECK(growth_report(Nonlinearity::rational({0.0, -1.0}, {1.0, 1.0}), s).pass);
  CHECK_THROWS_AS(growth_report(Nonlinearity::polynomial({-1.0}), {}), Error);
}
