// Acceptance checks: one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles/oracles.hpp"
#include "rpl/dynamics.hpp"
#include "rpl/errors.hpp"
#include "rpl/fgr.hpp"
#include "rpl/ground_state.hpp"
#include "rpl/pipeline.hpp"
#include "rpl/profile.hpp"

using namespace rpl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(const char* f, double x) {
  char b[64];
  std::snprintf(b, sizeof b, f, x);
  return b;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Built {
  GroundState gs;
  Operators op;
  SpectrumResult sp;
  ResonanceStructure rs;
  RefinedProfile rp;
};

Built build(const Nonlinearity& nl, double omega, const RadialGrid& g) {
  Built b;
  b.gs = solve_ground_state(nl, omega, g);
  b.op = build_operators(b.gs, nl, g);
  b.sp = discrete_spectrum(b.op);
  check_assumptions(b.sp.report, Tolerances{});
  b.rs = classify(b.sp.report.lambdas, omega, 1e-9 * omega);
  b.rp = build_refined_profile(b.gs, nl, b.op, b.sp.modes, b.rs);
  return b;
}

Nonlinearity cubic() { return Nonlinearity::polynomial({-1.0}); }
Nonlinearity cubic_quintic() { return Nonlinearity::polynomial({-1.0, -3.0}); }
Nonlinearity default_3d() { return Nonlinearity::saturated_quintic(1.0); }

Outcome ground_state_oracle() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  RadialGrid g(1, 30, 0.01);
  double worst_pt = 0, worst_mass = 0, worst_vk = 0, worst_fd = 0;
  for (double w : {0.5, 1.0, 2.0}) {
    auto gs = solve_ground_state(cubic(), w, g);
    for (int i = 0; i < g.size(); ++i)
      worst_pt = std::max(worst_pt, std::abs(gs.phi[i] - oracle::sech_ground_state(w, g.r()[i])));
    worst_mass = std::max(worst_mass, std::abs(gs.mass - oracle::sech_mass(w)));
    worst_vk = std::max(worst_vk, std::abs(gs.dmass - oracle::sech_mass_slope(w)));
    auto vk = vk_check(cubic(), {0.99 * w, w, 1.01 * w}, g);
    worst_fd = std::max(worst_fd, std::abs(vk[1].slope - oracle::sech_mass_slope(w)));
  }
  double t = seconds_since(t0);
  o.require(worst_pt <= 1e-7, "max pointwise error " + fmt("%.2e", worst_pt));
  o.require(worst_mass <= 1e-7, "mass error " + fmt("%.2e", worst_mass));
  o.require(worst_vk <= 1e-4 && worst_fd <= 1e-4,
            "VK slope error " + fmt("%.2e", worst_vk) + " (finite difference " + fmt("%.2e", worst_fd) + ")");
  o.require(t < 10.0, "runtime " + fmt("%.2f", t) + " s");
  return o;
}

Outcome spectral_oracle() {
  Outcome o;
  RadialGrid g(1, 30, 0.01);
  double worst_even = 0, worst_odd = 0, worst_lm = 0, worst_anti = 0;
  for (double w : {0.5, 1.0, 2.0}) {
    auto gs = solve_ground_state(cubic(), w, g);
    auto op = build_operators(gs, cubic(), g);
    auto sp = discrete_spectrum(op);
    worst_even = std::max(worst_even, std::abs(sp.report.lplus_eigs.at(0) / oracle::lplus_even_ground(w) - 1.0));
    worst_odd = std::max(worst_odd, std::abs(sp.report.lplus_odd_eigs.at(0) - oracle::lplus_odd_ground(w)) / w);
    worst_lm = std::max(worst_lm, std::abs(sp.report.lminus_eigs.at(0)));
    worst_anti = std::max(worst_anti, sigma1_anticommutator(op));
  }
  o.require(worst_even <= 1e-5 && worst_odd <= 1e-5,
            "L+ eigenvalues {-3w, 0} rel. error " + fmt("%.2e", std::max(worst_even, worst_odd)));
  o.require(worst_lm <= 1e-8, "L- ground eigenvalue " + fmt("%.2e", worst_lm));
  o.require(worst_anti == 0.0, "sigma1 anticommutator " + fmt("%.1e", worst_anti));
  // the cubic case has no internal modes; Krein normalization is checked where modes exist
  double krein = 0;
  {
    RadialGrid g1(1, 40, 0.05);
    auto gs = solve_ground_state(cubic_quintic(), 1.0, g1);
    auto sp = discrete_spectrum(build_operators(gs, cubic_quintic(), g1));
    krein = std::max({krein, sp.report.max_krein_defect, sp.report.max_krein_cross});
    RadialGrid g3(3, 60, 0.05);
    auto gs3 = solve_ground_state(default_3d(), 0.7, g3);
    auto sp3 = discrete_spectrum(build_operators(gs3, default_3d(), g3));
    krein = std::max({krein, sp3.report.max_krein_defect, sp3.report.max_krein_cross});
    if (sp.modes.empty() || sp3.modes.empty()) o.require(false, "expected internal modes in the Krein cases");
  }
  o.require(krein <= 1e-10, "Krein normalization defect " + fmt("%.2e", krein));
  return o;
}

Outcome kernel_identities() {
  Outcome o;
  RadialGrid g(3, 60, 0.05);
  auto gs = solve_ground_state(default_3d(), 0.7, g);
  auto op = build_operators(gs, default_3d(), g);
  o.require(op.lminus_phi <= 1e-8, "||L- phi||/||phi|| " + fmt("%.2e", op.lminus_phi));
  o.require(op.lplus_dphi <= 1e-6, "||L+ dphi + phi||/||phi|| " + fmt("%.2e", op.lplus_dphi));
  return o;
}

Outcome resonance_combinatorics() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> Nd(1, 3);
  std::uniform_real_distribution<double> U(0.1, 0.9);
  int mismatches = 0, minimality = 0, partition = 0, checked = 0;
  const double omega = 1.0, tau = 1e-9;
  for (int trial = 0; trial < 200; ++trial) {
    int N = Nd(rng);
    std::vector<double> l(N);
    for (auto& x : l) x = U(rng) * omega;
    auto rs = classify(l, omega, tau);
    auto bf = oracle::brute_classify(l, omega, tau, 6);
    const int nr_deg = std::min(rs.K_max, 6);
    for (const auto& m : bf.all) {
      ++checked;
      bool in_rmin = rs.in_R_min(m), in_i = rs.in_I(m), in_nr = rs.in_NR(m);
      if (in_rmin != bf.contains(bf.R_min, m) || in_i != bf.contains(bf.I, m) || in_nr != bf.contains(bf.NR, m))
        ++mismatches;
      if (int(in_rmin) + int(in_i) + int(in_nr) != 1) ++partition;
      if (m.norm() <= nr_deg) {
        bool listed = false;
        for (const auto& q : rs.NR) listed = listed || q == m;
        if (listed != bf.contains(bf.NR, m)) ++mismatches;
        bool l0 = false;
        for (const auto& q : rs.Lambda0) l0 = l0 || q == m;
        if (l0 != bf.contains(bf.Lambda0, m)) ++mismatches;
        for (int j = 0; j < N; ++j) {
          bool lj = false;
          for (const auto& q : rs.Lambda[j]) lj = lj || q == m;
          if (lj != bf.contains(bf.Lambda[j], m)) ++mismatches;
        }
      }
    }
    for (const auto& a : rs.R_min)
      for (const auto& b : rs.R_min)
        if (a != b && precedes(a, b)) ++minimality;
    for (const auto& m : rs.R_min)
      if (m.norm() <= 6 && !bf.contains(bf.R_min, m)) ++mismatches;
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " set mismatches over " + std::to_string(checked) + " indices");
  o.require(minimality == 0, std::to_string(minimality) + " comparable R_min pairs");
  o.require(partition == 0, std::to_string(partition) + " partition violations");
  return o;
}

Outcome refined_profile() {
  Outcome o;
  RadialGrid g(1, 40, 0.05);
  auto b = build(cubic_quintic(), 1.0, g);
  double worst = 0;
  for (const auto& [m, c] : b.rp.coeffs) worst = std::max(worst, c.residual);
  o.require(b.rs.N >= 1, "N = " + std::to_string(b.rs.N));
  o.require(worst <= 1e-8, "coefficient residual " + fmt("%.2e", worst));
  double orth = b.rp.max_orth;
  for (const auto& s : b.rp.sources) orth = std::max(orth, s.orth_defect);
  o.require(orth <= 1e-8, "orthogonality pairings " + fmt("%.2e", orth));
  int min_norm = 1 << 20;
  for (const auto& m : b.rs.R_min) min_norm = std::min(min_norm, m.norm());
  // dyadic sweep at the relative scale 0.01 ||phi|| / ||xi_+||
  double zs = 0.01 * g.norm(b.gs.phi) / g.norm(b.sp.modes[0].xi_plus);
  std::vector<double> x, y;
  for (double s : {1.0, 0.5, 0.25, 0.125}) {
    auto r = profile_residual(b.rp, 1.0, {s * zs * cplx(0.6, 0.8)});
    x.push_back(std::log(s));
    y.push_back(std::log(r.sigma_norm_R1));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  double slope = sxy / sxx, need = (min_norm + 1) - 0.1;
  o.require(slope >= need, "residual slope " + fmt("%.3f", slope) + " (need " + fmt("%.1f", need) + ")");
  return o;
}

Outcome jet_vs_hand() {
  Outcome o;
  auto space = std::make_shared<JetSpace>(1, 2);
  const int n = 64;
  RadialGrid g(1, 8, 0.125);
  Vec r = g.r();
  Vec p = (2.0 / r.array().cosh()).matrix(), X = (-r.array().square()).exp().matrix(),
      Y = (0.3 * (-0.5 * r.array().square()).exp()).matrix(), a = (r.array().sin() * (-r.array()).exp()).matrix(),
      b = (0.7 / (1.0 + r.array().square())).matrix(), c = (-0.2 * r.array().cos()).matrix();
  FieldJet phi = FieldJet::zero(space, n);
  phi[MultiIndex(1)] = p;
  phi[MultiIndex({1}, {0})] = X;
  phi[MultiIndex({0}, {1})] = Y;
  phi[MultiIndex({2}, {0})] = a;
  phi[MultiIndex({1}, {1})] = b;
  phi[MultiIndex({0}, {2})] = c;
  auto e = expand_nonlinearity(phi, Nonlinearity::polynomial({0.0, -1.0}));
  auto h = oracle::hand_quintic(p, X, Y, a, b, c);
  auto rel = [](const Vec& u, const Vec& v) { return (u - v).norm() / v.norm(); };
  double o1 = std::max(rel(e.at(MultiIndex({1}, {0})), h.cz), rel(e.at(MultiIndex({0}, {1})), h.czb));
  double o2 = std::max({rel(e.at(MultiIndex({2}, {0})), h.czz), rel(e.at(MultiIndex({1}, {1})), h.czzb),
                        rel(e.at(MultiIndex({0}, {2})), h.czbzb)});
  o.require(o1 <= 1e-12, "order-1 relative error " + fmt("%.2e", o1));
  o.require(o2 <= 1e-12, "order-2 relative error " + fmt("%.2e", o2));
  return o;
}

Outcome fgr() {
  Outcome o;
  double worst_free = 0;
  for (int d : {1, 3}) {
    RadialGrid g(d, 30, 0.05);
    double om = 0.7, r = 0.9025;
    auto op = oracle::free_operators(g, om);
    Vec G = (-0.5 * g.r().array().square()).exp();
    auto gr = fgr_gram_fields(op, r, {{G, G}});
    double ex = oracle::free_fgr_gaussian(d, om, r, g.sphere_area());
    worst_free = std::max({worst_free, std::abs(gr.gamma(0, 0) / ex - 1), std::abs(gr.gamma_ff(0, 0) / ex - 1)});
  }
  o.require(worst_free <= 5e-3, "free oracle rel. error " + fmt("%.2e", worst_free));

  auto gram_at = [&](double R) {
    RadialGrid g(3, R, 0.05);
    auto b = build(default_3d(), 0.7, g);
    if (b.rs.groups.empty()) throw Error(ErrorKind::InvalidInput, "default case has no resonance group");
    return fgr_gram(b.rp, b.op, 0);
  };
  auto g60 = gram_at(60.0), g75 = gram_at(75.0);
  o.require(g60.route_error <= 1e-2, "route agreement " + fmt("%.2e", g60.route_error));
  o.require(g60.hermitian_defect <= 1e-12, "Hermitian defect " + fmt("%.1e", g60.hermitian_defect));
  o.require(g60.min_eig >= -1e-10 * g60.trace, "min eigenvalue " + fmt("%.4e", g60.min_eig));
  double drift = (g75.gamma - g60.gamma).norm() / g60.gamma.norm();
  o.require(drift < 2e-2, "R -> 1.25 R drift " + fmt("%.2e", drift));
  return o;
}

Outcome modulation_round_trip() {
  Outcome o;
  RadialGrid g(1, 40, 0.05);
  auto b = build(cubic_quintic(), 1.0, g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst = 0;
  int failures = 0;
  for (int k = 0; k < 20; ++k) {
    double zr = U(rng), zi = U(rng), s = 1e-2 * std::abs(U(rng)) / std::max(1.0, std::hypot(zr, zi));
    Theta p{0.3 * U(rng), 1e-2 * U(rng), {s * cplx(zr, zi)}};
    try {
      auto r = decompose(synthesize(b.rp, p), b.rp, Theta{0.0, 0.0, {cplx(0)}});
      worst = std::max({worst, std::abs(r.p.theta - p.theta), std::abs(r.p.varpi - p.varpi), std::abs(r.p.z[0] - p.z[0])});
    } catch (const Error&) {
      ++failures;
    }
  }
  o.require(failures == 0 && worst <= 1e-8,
            "20 synthesized states recovered to " + fmt("%.2e", worst) + " (" + std::to_string(failures) + " failures)");
  int clean = 0;
  std::vector<CVec> bad;
  CVec bump = (-0.1 * g.r().array().square()).exp().cast<cplx>();
  bad.push_back(b.rp.phi.cast<cplx>() + cplx(0, 0.5) * bump / g.norm(bump));
  CVec osc = (g.r().array() * 3.0).cos().cast<cplx>() * (-0.05 * g.r().array().square()).exp().cast<cplx>();
  bad.push_back(b.rp.phi.cast<cplx>() + 0.5 * osc / g.norm(osc));
  for (const auto& u : bad) {
    try {
      decompose(u, b.rp, Theta{0.0, 0.0, {cplx(0)}});
    } catch (const Error& e) {
      clean += e.kind() == ErrorKind::NoConvergence;
    }
  }
  o.require(clean == static_cast<int>(bad.size()),
            std::to_string(clean) + "/" + std::to_string(bad.size()) + " out-of-basin inputs rejected");
  return o;
}

Outcome dynamics() {
  Outcome o;
  RadialGrid g(1, 40, 0.1);
  auto b = build(cubic_quintic(), 1.0, g);
  SimConfig base;
  base.grid = g;
  base.nl = cubic_quintic();

  SimConfig off = base;
  off.dt = 0.01;
  off.T = 10.0;
  off.sponge.on = false;
  off.init.mode = 0;
  off.init.amplitude = 0.01;
  auto ts_off = run(off, b.rp);
  o.require(ts_off.q0_drift <= 1e-8, "sponge-off Q0 drift " + fmt("%.2e", ts_off.q0_drift));

  SimConfig sol = base;
  sol.dt = 0.01;
  sol.T = 10.0;
  auto ts_sol = run(sol, b.rp);
  double zmax = 0;
  for (const auto& z : ts_sol.z) zmax = std::max(zmax, std::abs(z[0]));
  o.require(zmax <= 1e-6, "soliton max |z| " + fmt("%.2e", zmax));

  auto gram = fgr_gram(b.rp, b.op, 0);
  o.require(gram.min_eig > 0, "Gamma min eigenvalue " + fmt("%.3e", gram.min_eig));
  SimConfig dec = base;
  dec.dt = 0.1;
  dec.T = 17000.0;
  dec.stride = 5;
  dec.sponge.strength = 2.0;
  dec.init.mode = 0;
  dec.init.amplitude = 0.01;
  auto ts = run(dec, b.rp);
  auto m = fgr_decay_report(ts, ts.lambdas);
  o.require(m.monotonicity_defect <= 0.05, "envelope monotonicity defect " + fmt("%.3f", m.monotonicity_defect));
  o.require(m.envelope_drop >= 2.0, "envelope drop " + fmt("%.2f", m.envelope_drop) + "x");
  o.require(m.S_last_quarter_share < 0.25, "S(T) last-quarter share " + fmt("%.3f", m.S_last_quarter_share));
  o.require(m.varpi_ratio <= 0.1, "varpi final-quarter oscillation / excursion " + fmt("%.3f", m.varpi_ratio));
  return o;
}

Outcome pipeline_determinism() {
  Outcome o;
  const char* t = std::getenv("RPL_TEST_TMP");
  fs::path root = (t ? fs::path(t) : fs::temp_directory_path() / "rpl-acceptance") / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string text = R"(
[nonlinearity]
kind = polynomial
numerator = [-1, -3]

[grid]
dimension = 1
R = 40
h = 0.05

[omega]
star = 1
sweep = [0.98, 0.99, 1.0, 1.01, 1.02]

[stages]
run = ground, spectrum, resonance, profile, fgr

[output]
dir = out
cache_dir = cache
)";
  auto cfg = parse_config(text, root.string());
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  auto a = run_pipeline(cfg);
  std::string ra = slurp(root / "out" / "report.json");
  auto b = run_pipeline(cfg);
  std::string rb = slurp(root / "out" / "report.json");
  o.require(a.exit_code == 0 && b.exit_code == 0, "exit codes " + std::to_string(a.exit_code) + "," + std::to_string(b.exit_code));
  o.require(a.cache_misses > 0 && b.cache_hits > 0 && b.cache_misses == 0,
            "cold run " + std::to_string(a.cache_misses) + " misses, warm run " + std::to_string(b.cache_hits) + " hits");
  o.require(!ra.empty() && ra == rb, "report.json byte-identical across runs");
  // a cold run into a fresh cache must reproduce the warm numbers
  auto cold = cfg;
  cold.cache_dir = (root / "cache-cold").string();
  cold.output_dir = (root / "out-cold").string();
  run_pipeline(cold);
  o.require(slurp(root / "out-cold" / "report.json") == ra, "cold-cache report identical to the cached one");
  int removed = clean_cache((root / "cache").string());
  auto c = run_pipeline(cfg);
  o.require(removed > 0 && c.cache_misses == a.cache_misses && c.cache_hits == a.cache_hits,
            "clean-cache removed " + std::to_string(removed) + " files; rerun " + std::to_string(c.cache_hits) +
                " hits, " + std::to_string(c.cache_misses) + " misses");
  o.require(slurp(root / "out" / "report.json") == ra, "rerun after clean-cache identical");
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> all = {
      {"ground-state oracle", ground_state_oracle},
      {"spectral oracle", spectral_oracle},
      {"kernel identities", kernel_identities},
      {"resonance combinatorics", resonance_combinatorics},
      {"refined profile", refined_profile},
      {"jet vs hand expansion", jet_vs_hand},
      {"FGR", fgr},
      {"modulation round trip", modulation_round_trip},
      {"dynamics", dynamics},
      {"pipeline determinism", pipeline_determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::fprintf(stderr, "criterion must be 1..%zu\n", all.size());
    return 2;
  }
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(all.size()); ++k) {
    if (only && k != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[k - 1].fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %2d %-26s %s  (%s) [%.1f s]\n", k, all[k - 1].name, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
