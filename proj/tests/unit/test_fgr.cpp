#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "rpl/errors.hpp"
#include "rpl/fgr.hpp"

using namespace rpl;

TEST_CASE("free Gaussian: all routes reproduce the analytic Gram entry") {
  for (int d : {1, 3}) {
    RadialGrid g(d, 30, 0.05);
    double om = 0.7, r = 0.9025;
    auto op = oracle::free_operators(g, om);
    Vec G = (-0.5 * g.r().array().square()).exp();
    auto gr = fgr_gram_fields(op, r, {{G, G}});
    double ex = oracle::free_fgr_gaussian(d, om, r, g.sphere_area());
    CHECK(gr.gamma(0, 0) == doctest::Approx(ex).epsilon(1e-5));
    CHECK(gr.gamma_direct(0, 0) == doctest::Approx(ex).epsilon(1e-5));
    CHECK(gr.gamma_ff(0, 0) == doctest::Approx(ex).epsilon(1e-5));
    CHECK_FALSE(gr.unresolved);
  }
}

TEST_CASE("3D far-field amplitude of the Gaussian source") {
  RadialGrid g(3, 30, 0.05);
  double om = 0.7, r = 0.9025, rho = std::sqrt(r - om);
  auto op = oracle::free_operators(g, om);
  Vec G = (-0.5 * g.r().array().square()).exp();
  auto ff = farfield_amplitude(op, r, G, G);
  cplx expect = -std::sqrt(M_PI / 2) * std::exp(-rho * rho / 2);
  CHECK(std::abs(ff.amplitude - expect) / std::abs(expect) < 1e-5);
}

TEST_CASE("resolvent matches the exact 3D outgoing kernel") {
  RadialGrid g(3, 30, 0.05);
  double om = 0.7, lam = 0.9, eps = 0.05;
  auto op = oracle::free_operators(g, om);
  cplx k = std::sqrt(cplx(lam - om, eps));
  Vec f = (-0.5 * g.r().array().square()).exp();
  auto res = resolvent_apply(op, lam, eps, f.cast<cplx>(), CVec::Zero(g.size()));
  double err = 0, mx = 0;
  for (int i = 0; i < g.size(); i += 40) {
    double ri = g.r()[i];
    cplx s = 0;
    const int M = 20000;
    const double L = 15, ds = L / M;
    for (int q = 0; q < M; ++q) {
      double sq = (q + 0.5) * ds, rl = std::min(ri, sq), rg = std::max(ri, sq);
      s += std::sin(k * rl) * std::exp(cplx(0, 1) * k * rg) * std::exp(-0.5 * sq * sq) * sq * ds;
    }
    cplx u = s / (k * ri);
    err = std::max(err, std::abs(u - res.upper[i]));
    mx = std::max(mx, std::abs(u));
  }
  CHECK(err / mx < 1e-5);
  CHECK(res.residual < 1e-10);
}

TEST_CASE("d = 2 and thresholds below the edge are rejected") {
  RadialGrid g2(2, 10, 0.1, 2);
  auto op2 = oracle::free_operators(g2, 0.7);
  Vec G = Vec::Ones(g2.size());
  CHECK_THROWS_AS(fgr_gram_fields(op2, 0.9, {{G, G}}), Error);
  RadialGrid g(1, 10, 0.1);
  auto op = oracle::free_operators(g, 0.7);
  Vec G1 = Vec::Ones(g.size());
  CHECK_THROWS_AS(fgr_gram_fields(op, 0.5, {{G1, G1}}), Error);
}

TEST_CASE("gram status and H7 aggregation") {
  Eigen::MatrixXd pd(2, 2), sing(2, 2), neg(2, 2);
  pd << 2, 0.5, 0.5, 1;
  sing << 1, 1, 1, 1;
  neg << 1, 0, 0, -0.5;
  CHECK(gram_status(pd, 1e-2) == Status::Pass);
  CHECK(gram_status(sing, 1e-2) == Status::Fail);
  CHECK(gram_status(neg, 1e-2) == Status::Fail);
  CHECK(gram_status(pd, 1e-2, true) == Status::Indeterminate);
  CHECK(check_H7({}).status == Status::Skipped);
  FgrGram a, b;
  a.gamma = pd;
  a.status = Status::Pass;
  b.gamma = sing;
  b.status = Status::Fail;
  CHECK(check_H7({a}).status == Status::Pass);
  CHECK(check_H7({a, b}).status == Status::Fail);
}
