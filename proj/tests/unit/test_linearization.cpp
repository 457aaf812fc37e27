#include <doctest.h>

#include <cmath>

#include "oracles/oracles.hpp"
#include "rpl/errors.hpp"
#include "rpl/ground_state.hpp"
#include "rpl/linearization.hpp"

using namespace rpl;

TEST_CASE("1D cubic: Poschl-Teller spectrum, no internal modes, H1 pass") {
  RadialGrid g(1, 30, 0.02);
  auto nl = Nonlinearity::polynomial({-1.0});
  auto gs = solve_ground_state(nl, 1.0, g);
  auto op = build_operators(gs, nl, g);
  auto sp = discrete_spectrum(op);
  check_assumptions(sp.report, Tolerances{});
  const auto& r = sp.report;
  REQUIRE(!r.lplus_eigs.empty());
  CHECK(r.lplus_eigs[0] == doctest::Approx(oracle::lplus_even_ground(1.0)).epsilon(1e-5));
  REQUIRE(!r.lplus_odd_eigs.empty());
  CHECK(std::abs(r.lplus_odd_eigs[0]) < 1e-5);
  CHECK(std::abs(r.lminus_eigs[0]) < 1e-8);
  CHECK(r.morse_index == 1);
  CHECK(r.n_modes == 0);
  CHECK(r.H1.status == Status::Pass);
  CHECK(r.H4.status == Status::Indeterminate);
  CHECK(sigma1_anticommutator(op) == 0.0);
  CHECK(op.lminus_phi < 1e-8);
  CHECK(op.lplus_dphi < 1e-6);
  CHECK(op.lplus_translation < 1e-6);
}

TEST_CASE("cubic-quintic internal mode is Krein normalized") {
  RadialGrid g(1, 40, 0.05);
  auto nl = Nonlinearity::polynomial({-1.0, -3.0});
  auto gs = solve_ground_state(nl, 1.0, g);
  auto op = build_operators(gs, nl, g);
  auto sp = discrete_spectrum(op);
  REQUIRE(sp.modes.size() == 1);
  const auto& m = sp.modes[0];
  CHECK(m.lambda > 0.0);
  CHECK(m.lambda < 1.0);
  CHECK(m.residual < 1e-8);
  double krein = g.inner(m.xi_plus, m.xi_plus) - g.inner(m.xi_minus, m.xi_minus);
  CHECK(krein == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(sp.report.max_krein_defect <= 1e-10);
  // the mirror vector sigma1 xi is an eigenvector at -lambda
  CHECK(m.mirror_residual < 1e-8);
}

TEST_CASE("synthetic double well gives Morse index 2 and H1 fail") {
  RadialGrid g(1, 20, 0.05);
  Vec phi = (-g.r().array().square()).exp();
  Vec deep = -12.0 * (-0.25 * g.r().array().square()).exp();
  Operators op = operators_from_potentials(g, 1.0, phi, deep, Vec::Zero(g.size()));
  SpectralReport rep;
  rep.omega = 1.0;
  rep.lplus_eigs = sym_band_eigenvalues(op.lplus, -100.0, 1.0);
  for (double e : rep.lplus_eigs) rep.morse_index += e < 0;
  REQUIRE(rep.morse_index >= 2);
  check_assumptions(rep, Tolerances{});
  CHECK(rep.H1.status == Status::Fail);
}

TEST_CASE("eigenvalue within tau_edge of the edge flags H3") {
  SpectralReport rep;
  rep.omega = 1.0;
  rep.morse_index = 1;
  rep.n_modes = 1;
  rep.lambdas = {0.9999};
  rep.dist_zero = {0.9999};
  rep.dist_edge = {1e-4};
  rep.threshold_checked = true;
  rep.threshold_growth = 1.0;
  check_assumptions(rep, Tolerances{});
  CHECK(rep.H3.status == Status::Fail);
  rep.dist_edge = {0.2};
  check_assumptions(rep, Tolerances{});
  CHECK(rep.H3.status == Status::Pass);
}

TEST_CASE("H5 from an omega sweep") {
  SpectralReport rep;
  rep.omega = 1.0;
  std::vector<double> om{0.9, 1.0, 1.1};
  std::vector<std::vector<double>> smooth{{0.70}, {0.75}, {0.80}}, jump{{0.70}, {0.75}, {0.95}}, lost{{0.7}, {0.75}, {}};
  check_assumptions(rep, Tolerances{}, &smooth, &om);
  CHECK(rep.H5.status == Status::Pass);
  check_assumptions(rep, Tolerances{}, &jump, &om);
  CHECK(rep.H5.status == Status::Fail);
  check_assumptions(rep, Tolerances{}, &lost, &om);
  CHECK(rep.H5.status == Status::Fail);
  check_assumptions(rep, Tolerances{});
  CHECK(rep.H5.status == Status::Indeterminate);
}

TEST_CASE("3D saturated quintic: kernel identities and one radial mode") {
  RadialGrid g(3, 40, 0.05);
  auto nl = Nonlinearity::saturated_quintic(1.0);
  auto gs = solve_ground_state(nl, 0.7, g);
  auto op = build_operators(gs, nl, g);
  CHECK(op.lminus_phi < 1e-8);
  CHECK(op.lplus_dphi < 1e-6);
  auto sp = discrete_spectrum(op);
  check_assumptions(sp.report, Tolerances{});
  CHECK(sp.report.H1.status == Status::Pass);
  CHECK(sp.report.n_modes == 1);
  CHECK(sp.report.H3.status == Status::Pass);
}
