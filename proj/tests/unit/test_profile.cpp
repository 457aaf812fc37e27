#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "rpl/errors.hpp"
#include "rpl/ground_state.hpp"
#include "rpl/profile.hpp"

using namespace rpl;

namespace {

struct Case {
  RadialGrid g{1, 40, 0.05};
  Nonlinearity nl = Nonlinearity::polynomial({-1.0, -3.0});
  GroundState gs;
  Operators op;
  SpectrumResult sp;
  ResonanceStructure rs;
  RefinedProfile rp;
  Case() {
    gs = solve_ground_state(nl, 1.0, g);
    op = build_operators(gs, nl, g);
    sp = discrete_spectrum(op);
    rs = classify(sp.report.lambdas, 1.0, 1e-9);
    rp = build_refined_profile(gs, nl, op, sp.modes, rs);
  }
};

const Case& cq() {
  static Case c;
  return c;
}

}  // namespace

TEST_CASE("jet expansion of -s^2 matches the hand expansion") {
  auto space = std::make_shared<JetSpace>(1, 2);
  const int n = 7;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto rnd = [&] {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = U(rng);
    return v;
  };
  Vec p = rnd().array().abs() + 0.5, X = rnd(), Y = rnd(), a = rnd(), b = rnd(), c = rnd();
  FieldJet phi = FieldJet::zero(space, n);
  phi[MultiIndex(1)] = p;
  phi[MultiIndex({1}, {0})] = X;
  phi[MultiIndex({0}, {1})] = Y;
  phi[MultiIndex({2}, {0})] = a;
  phi[MultiIndex({1}, {1})] = b;
  phi[MultiIndex({0}, {2})] = c;
  FieldJet e = expand_nonlinearity(phi, Nonlinearity::polynomial({0.0, -1.0}));
  auto h = oracle::hand_quintic(p, X, Y, a, b, c);
  auto rel = [](const Vec& x, const Vec& y) { return (x - y).norm() / y.norm(); };
  CHECK(rel(e.at(MultiIndex(1)), h.c0) < 1e-12);
  CHECK(rel(e.at(MultiIndex({1}, {0})), h.cz) < 1e-12);
  CHECK(rel(e.at(MultiIndex({0}, {1})), h.czb) < 1e-12);
  CHECK(rel(e.at(MultiIndex({2}, {0})), h.czz) < 1e-12);
  CHECK(rel(e.at(MultiIndex({1}, {1})), h.czzb) < 1e-12);
  CHECK(rel(e.at(MultiIndex({0}, {2})), h.czbzb) < 1e-12);
}

TEST_CASE("jet evaluation agrees with pointwise arithmetic") {
  auto space = std::make_shared<JetSpace>(1, 3);
  FieldJet f = FieldJet::zero(space, 2);
  f[MultiIndex(1)] = Vec::Constant(2, 1.0);
  f[MultiIndex({1}, {0})] = Vec::Constant(2, 0.5);
  FieldJet sq = f * f;
  cplx z(0.1, -0.2);
  CVec direct = f.eval({z}).array().square();
  CHECK((sq.eval({z}) - direct).norm() < 1e-14);
}

TEST_CASE("refined profile: coefficient residuals, orthogonality, sources") {
  const auto& c = cq();
  CHECK(c.rs.N == 1);
  CHECK(c.rp.max_residual <= 1e-8);
  CHECK(c.rp.max_orth <= 1e-8);
  for (const auto& [m, coef] : c.rp.coeffs) CHECK(coef.residual <= 1e-8);
  REQUIRE(c.rp.sources.size() >= 1);
  for (const auto& s : c.rp.sources) {
    CHECK(s.r > 1.0);
    CHECK(s.orth_defect <= 1e-8);
    CHECK(c.g.norm(s.G) > 0.0);
  }
}

TEST_CASE("assemble at z = 0 is the ground state") {
  const auto& c = cq();
  auto a = assemble(c.rp, 1.0, {cplx(0.0)});
  CHECK((a.phi - c.gs.phi.cast<cplx>()).norm() < 1e-14);
  CHECK_FALSE(a.outside_validity);
  CHECK(assemble(c.rp, 1.0, {cplx(5.0)}).outside_validity);
}

TEST_CASE("residual beyond the solved orders scales with |z|^3") {
  const auto& c = cq();
  double zs = 0.01 * c.g.norm(c.gs.phi) / c.g.norm(c.sp.modes[0].xi_plus);
  double prev = 0;
  for (double s : {1.0, 0.5}) {
    auto r = profile_residual(c.rp, 1.0, {s * zs * cplx(0.6, 0.8)});
    if (prev > 0) CHECK(std::log2(prev / r.sigma_norm_R1) > 2.9);
    prev = r.sigma_norm_R1;
  }
}

TEST_CASE("small eigenvalues need derivatives beyond the supported order") {
  auto rs = classify({0.15}, 1.0, 1e-9);
  CHECK(rs.K_max > 4);
  const auto& c = cq();
  std::vector<InternalMode> fake = c.sp.modes;
  fake[0].lambda = 0.15;
  CHECK_THROWS_AS(build_refined_profile(c.gs, c.nl, c.op, fake, rs), Error);
}
