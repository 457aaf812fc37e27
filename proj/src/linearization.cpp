#include "rpl/linearization.hpp"

#include <algorithm>
#include <cmath>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

double gershgorin_low(const Band<double>& a) {
  double lo = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    double off = 0.0;
    for (int j = std::max(0, i - a.bandwidth()); j <= std::min(a.size() - 1, i + a.bandwidth()); ++j)
      if (j != i) off += std::abs(a.at(i, j));
    lo = std::min(lo, a.at(i, i) - off);
  }
  return lo - 1.0;
}

Band<double> with_potential(Band<double> s, double omega, const Vec& v) {
  for (int i = 0; i < s.size(); ++i) s(i, i) += omega + v[i];
  return s;
}

}  // namespace

Operators operators_from_potentials(const RadialGrid& grid, double omega, const Vec& phi, const Vec& vplus,
                                    const Vec& vminus) {
  Operators op{grid, omega, phi, Vec::Zero(grid.size()), vplus, vminus, 0.5 * (vplus - vminus), {}, {}, {}};
  op.lplus = with_potential(grid.neg_laplacian(), omega, vplus);
  op.lminus = with_potential(grid.neg_laplacian(), omega, vminus);
  if (grid.dimension() == 1) op.lplus_odd = with_potential(grid.neg_laplacian(Parity::Odd), omega, vplus);
  return op;
}

Operators build_operators(const GroundState& gs, const Nonlinearity& nl, const RadialGrid& grid) {
  const int n = grid.size();
  Vec vp(n), vm(n);
  for (int i = 0; i < n; ++i) {
    double s = gs.phi[i] * gs.phi[i];
    auto g = nl.evaluate(s, 1);
    vp[i] = g[0] + 2.0 * g[1] * s;
    vm[i] = g[0];
  }
  Operators op = operators_from_potentials(grid, gs.omega, gs.phi, vp, vm);
  op.dphi = gs.dphi;
  const Vec& sw = grid.sqrt_weights();
  Vec v = gs.phi.cwiseProduct(sw);
  op.lminus_phi = op.lminus.apply(v).norm() / v.norm();
  op.lplus_dphi = (op.lplus.apply(Vec(gs.dphi.cwiseProduct(sw))) + v).norm() / v.norm();
  if (grid.dimension() == 1) {
    Vec dp = grid.derivative(gs.phi).cwiseProduct(sw);
    op.lplus_translation = op.lplus_odd.apply(dp).norm() / dp.norm();
  }
  return op;
}

Band<double> hamiltonian_band(const Operators& op, double shift) {
  const int n = op.grid.size(), p = op.lplus.bandwidth();
  Band<double> H(2 * n, 2 * p);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - p); j <= std::min(n - 1, i + p); ++j) {
      double a = 0.5 * (op.lplus.at(i, j) + op.lminus.at(i, j));
      H(2 * i, 2 * j) = a;
      H(2 * i + 1, 2 * j + 1) = -a;
    }
    H(2 * i, 2 * i + 1) = op.b[i];
    H(2 * i + 1, 2 * i) = -op.b[i];
    H(2 * i, 2 * i) -= shift;
    H(2 * i + 1, 2 * i + 1) -= shift;
  }
  return H;
}

Band<double> sturm_matrix(const Operators& op, double lam) {
  const int n = op.grid.size(), p = op.lplus.bandwidth();
  Band<double> Q(2 * n, 2 * p);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - p); j <= std::min(n - 1, i + p); ++j) {
      Q(2 * i, 2 * j) = op.lplus.at(i, j);
      Q(2 * i + 1, 2 * j + 1) = op.lminus.at(i, j);
    }
    Q(2 * i, 2 * i + 1) = -lam;
    Q(2 * i + 1, 2 * i) = -lam;
  }
  return Q;
}

double sigma1_anticommutator(const Operators& op) {
  // (sigma1 H sigma1)_{ab} swaps the component labels of both indices
  Band<double> H = hamiltonian_band(op);
  double m = 0.0;
  const int N = H.size();
  for (int a = 0; a < N; ++a)
    for (int b = std::max(0, a - H.bandwidth()); b <= std::min(N - 1, a + H.bandwidth()); ++b) {
      int as = a ^ 1, bs = b ^ 1;
      m = std::max(m, std::abs(H.at(as, bs) + H.at(a, b)));
    }
  return m;
}

namespace {

void split(const Vec& x, Vec& up, Vec& lo) {
  const int n = static_cast<int>(x.size() / 2);
  up.resize(n);
  lo.resize(n);
  for (int i = 0; i < n; ++i) {
    up[i] = x[2 * i];
    lo[i] = x[2 * i + 1];
  }
}

Vec join(const Vec& up, const Vec& lo) {
  Vec x(2 * up.size());
  for (int i = 0; i < up.size(); ++i) {
    x[2 * i] = up[i];
    x[2 * i + 1] = lo[i];
  }
  return x;
}

double krein_sym(const Vec& x) {
  double k = 0.0;
  for (int i = 0; i + 1 < x.size(); i += 2) k += x[i] * x[i] - x[i + 1] * x[i + 1];
  return k;
}

}  // namespace

InternalMode krein_normalize(const RadialGrid& grid, InternalMode mode) {
  double k = grid.inner(mode.xi_plus, mode.xi_plus) - grid.inner(mode.xi_minus, mode.xi_minus);
  if (!(k > 0)) throw Error(ErrorKind::NegativeKreinSignature, "(sigma3 xi, xi) = " + std::to_string(k));
  double s = 1.0 / std::sqrt(k);
  Eigen::Index imax;
  mode.xi_plus.cwiseAbs().maxCoeff(&imax);
  if (mode.xi_plus[imax] < 0) s = -s;
  mode.xi_plus *= s;
  mode.xi_minus *= s;
  mode.krein = grid.inner(mode.xi_plus, mode.xi_plus) - grid.inner(mode.xi_minus, mode.xi_minus);
  return mode;
}

double krein_cross_defect(const RadialGrid& grid, const std::vector<InternalMode>& modes) {
  double m = 0.0;
  for (size_t j = 0; j < modes.size(); ++j)
    for (size_t k = 0; k < modes.size(); ++k) {
      double v = grid.inner(modes[j].xi_plus, modes[k].xi_plus) - grid.inner(modes[j].xi_minus, modes[k].xi_minus);
      m = std::max(m, std::abs(v - (j == k ? 1.0 : 0.0)));
    }
  return m;
}

double threshold_growth(const Operators& op) {
  const RadialGrid& g = op.grid;
  const int n = g.size();
  if (g.dimension() == 2) return std::nan("");
  const int p = g.order() == 4 ? 2 : 1;
  // upper exterior: -v'' = 0 -> linear extrapolation; lower: decaying root of (-D + 2 omega)
  Eigen::MatrixXcd Tlin(p, 2);
  if (p == 2)
    Tlin << -1.0, 2.0, -2.0, 3.0;
  else
    Tlin << -1.0, 2.0;
  Band<cplx> Sup = g.neg_laplacian_closed(Tlin);
  auto mus = g.exterior_roots(2.0 * op.omega);
  Band<cplx> Slo = g.neg_laplacian_closed(g.ghost_matrix(mus));
  const int k = std::max(Sup.bandwidth(), Slo.bandwidth());
  Band<cplx> M(2 * n, 2 * k);
  // (H - omega): [[A - omega, B], [-B, -A - omega]] with A = S + omega + (V+ + V-)/2
  for (int i = 0; i < n; ++i) {
    double va = 0.5 * (op.vplus[i] + op.vminus[i]);
    for (int j = std::max(0, i - k); j <= std::min(n - 1, i + k); ++j) {
      M(2 * i, 2 * j) = Sup.at(i, j);
      M(2 * i + 1, 2 * j + 1) = -Slo.at(i, j);
    }
    M(2 * i, 2 * i) += va;
    M(2 * i + 1, 2 * i + 1) += -(va + 2.0 * op.omega);
    M(2 * i, 2 * i + 1) = op.b[i];
    M(2 * i + 1, 2 * i) = -op.b[i];
  }
  // normalize: replace the last upper row by v+(n-1) = 1
  const int last = 2 * (n - 1);
  for (int j = std::max(0, last - 2 * k); j <= std::min(2 * n - 1, last + 2 * k); ++j) M(last, j) = 0.0;
  M(last, last) = 1.0;
  CVec rhs = CVec::Zero(2 * n);
  rhs[last] = 1.0;
  CVec x = BandLU<cplx>(M).solve(rhs);
  // fit alpha + beta r over the outer 30% on the upper component (symmetric coordinates)
  int i0 = static_cast<int>(0.7 * n);
  double sr = 0, sv = 0, srr = 0, srv = 0, cnt = 0, vmax = 0;
  for (int i = i0; i < n; ++i) {
    double r = g.r()[i], v = x[2 * i].real();
    sr += r;
    sv += v;
    srr += r * r;
    srv += r * v;
    cnt += 1;
    vmax = std::max(vmax, std::abs(v));
  }
  double beta = (cnt * srv - sr * sv) / (cnt * srr - sr * sr);
  double alpha = (sv - beta * sr) / cnt;
  return std::abs(beta) * g.R() / (std::abs(alpha) + std::abs(beta) * g.R());
}

SpectrumResult discrete_spectrum(const Operators& op, const SpectrumOptions& opt) {
  const RadialGrid& grid = op.grid;
  const double omega = op.omega;
  SpectrumResult out;
  SpectralReport& rep = out.report;
  rep.omega = omega;
  rep.lplus_eigs = sym_band_eigenvalues(op.lplus, gershgorin_low(op.lplus), omega);
  rep.lminus_eigs = sym_band_eigenvalues(op.lminus, gershgorin_low(op.lminus), omega);
  if (grid.dimension() == 1)
    rep.lplus_odd_eigs = sym_band_eigenvalues(op.lplus_odd, gershgorin_low(op.lplus_odd), omega);
  const double tk = opt.tau_kernel * std::max(1.0, omega);
  for (double e : rep.lplus_eigs) {
    if (e < -tk) ++rep.morse_index;
    if (std::abs(e) <= tk) ++rep.ker_lplus;
  }
  for (double e : rep.lminus_eigs)
    if (std::abs(e) <= tk) ++rep.ker_lminus;

  const Vec& sw = grid.sqrt_weights();
  bool has_profile = op.phi.size() == grid.size() && op.phi.norm() > 0 && op.dphi.norm() > 0;
  if (has_profile) {
    rep.vk_slope = 2.0 * grid.inner(op.phi, op.dphi);
    int unstable = rep.morse_index - (rep.vk_slope > 0 ? 1 : 0);
    if (unstable > 0)
      throw Error(ErrorKind::InstabilityDetected,
                  "linearization has " + std::to_string(unstable) + " unstable pair(s): Morse index " +
                      std::to_string(rep.morse_index) + ", d|phi|^2/domega = " + std::to_string(rep.vk_slope));
  }

  const double lam_min = opt.lambda_min_frac * omega;
  auto count = [&](double lam) { return negative_count(sturm_matrix(op, lam)); };
  rep.sturm_base = count(lam_min);
  int top = count(omega);
  int nmodes = top - rep.sturm_base;
  if (nmodes < 0) throw Error(ErrorKind::EigensolverFailure, "Sturm count decreased across the gap");
  std::vector<double> lams;
  for (int k = 1; k <= nmodes; ++k) {
    double lo = lam_min, hi = omega;
    for (int it = 0; it < 200 && hi - lo > 4e-16 * omega; ++it) {
      double mid = 0.5 * (lo + hi);
      if (count(mid) - rep.sturm_base >= k)
        hi = mid;
      else
        lo = mid;
    }
    lams.push_back(0.5 * (lo + hi));
  }

  const int n = grid.size();
  for (int k = 0; k < nmodes; ++k) {
    double lam = lams[k];
    Band<double> Hs = hamiltonian_band(op, lam + 1e-9 * omega);
    BandLU<double> lu(Hs);
    Vec x(2 * n);
    for (int i = 0; i < 2 * n; ++i) x[i] = 1.0 + 0.3 * std::sin(0.7 * i + k);
    x.normalize();
    for (int it = 0; it < 6; ++it) {
      x = lu.solve(x);
      // keep degenerate partners apart in the Krein form
      for (const auto& prev : out.modes) {
        if (std::abs(prev.lambda - lam) > 1e-6 * omega) continue;
        Vec y = join(prev.xi_plus.cwiseProduct(sw), prev.xi_minus.cwiseProduct(sw));
        double c = 0.0;
        for (int i = 0; i < 2 * n; i += 2) c += x[i] * y[i] - x[i + 1] * y[i + 1];
        x -= c * y;
      }
      x.normalize();
    }
    Band<double> H = hamiltonian_band(op);
    Vec Hx = H.apply(x);
    // Rayleigh quotient in the Krein form
    double kx = krein_sym(x), num = 0.0;
    for (int i = 0; i < 2 * n; i += 2) num += Hx[i] * x[i] - Hx[i + 1] * x[i + 1];
    double lam_r = num / kx;
    InternalMode m;
    m.j = k + 1;
    m.lambda = lam_r;
    Vec up, lo;
    split(x, up, lo);
    m.xi_plus = up.cwiseQuotient(sw);
    m.xi_minus = lo.cwiseQuotient(sw);
    m = krein_normalize(grid, m);
    Vec xs = join(m.xi_plus.cwiseProduct(sw), m.xi_minus.cwiseProduct(sw));
    m.residual = (H.apply(xs) - m.lambda * xs).norm() / xs.norm();
    // sigma1 xi for -lambda
    Vec mirror(2 * n);
    for (int i = 0; i < n; ++i) {
      mirror[2 * i] = xs[2 * i + 1];
      mirror[2 * i + 1] = xs[2 * i];
    }
    m.mirror_residual = (H.apply(mirror) + m.lambda * mirror).norm() / mirror.norm();
    Vec a = (m.xi_plus + m.xi_minus).cwiseProduct(sw);
    Vec comp = op.lminus.apply(Vec(op.lplus.apply(a))) - m.lambda * m.lambda * a;
    m.composed_residual = comp.norm() / (m.lambda * m.lambda * a.norm());
    out.modes.push_back(m);
  }
  rep.n_modes = nmodes;
  for (const auto& m : out.modes) {
    rep.lambdas.push_back(m.lambda);
    rep.dist_zero.push_back(m.lambda);
    rep.dist_edge.push_back(omega - m.lambda);
    rep.max_krein_defect = std::max(rep.max_krein_defect, std::abs(m.krein - 1.0));
    if (m.residual > opt.tol_eig)
      throw Error(ErrorKind::EigensolverFailure,
                  "mode " + std::to_string(m.j) + " residual " + std::to_string(m.residual));
  }
  rep.max_krein_cross = 0.0;
  for (size_t j = 0; j < out.modes.size(); ++j)
    for (size_t k = 0; k < out.modes.size(); ++k)
      if (j != k)
        rep.max_krein_cross = std::max(
            rep.max_krein_cross, std::abs(grid.inner(out.modes[j].xi_plus, out.modes[k].xi_plus) -
                                          grid.inner(out.modes[j].xi_minus, out.modes[k].xi_minus)));
  if (grid.dimension() != 2) {
    rep.threshold_growth = threshold_growth(op);
    rep.threshold_checked = true;
  }
  return out;
}

void check_assumptions(SpectralReport& rep, const Tolerances& tol, const std::vector<std::vector<double>>* sweep,
                       const std::vector<double>* sweep_omegas) {
  rep.H1 = {};
  rep.H1.evidence["morse_index"] = rep.morse_index;
  rep.H1.evidence["radial_kernel_lplus"] = rep.ker_lplus;
  rep.H1.status = (rep.morse_index == 1 && rep.ker_lplus == 0) ? Status::Pass : Status::Fail;

  rep.H3 = {};
  double min_edge = rep.omega;
  for (double d : rep.dist_edge) min_edge = std::min(min_edge, d);
  rep.H3.evidence["min_distance_to_edge"] = min_edge;
  if (rep.threshold_checked) rep.H3.evidence["threshold_growth"] = rep.threshold_growth;
  if (min_edge < tol.tau_edge * rep.omega) {
    rep.H3.status = Status::Fail;
    rep.H3.note = "eigenvalue within tau_edge of the continuum edge";
  } else if (!rep.threshold_checked) {
    rep.H3.status = Status::Indeterminate;
    rep.H3.note = "threshold solution not classified in this dimension";
  } else if (rep.threshold_growth > 0.5) {
    rep.H3.status = Status::Pass;
  } else {
    rep.H3.status = Status::Indeterminate;
    rep.H3.note = "zero-energy solution at the edge stays bounded (threshold resonance suspected)";
  }

  rep.H4 = {};
  rep.H4.status = Status::Indeterminate;
  rep.H4.evidence["gap_eigenvalues_found"] = rep.n_modes;
  rep.H4.evidence["eigenvalues_beyond_edge_among_computed"] = 0;
  rep.H4.note = "embedded eigenvalues are not certifiable on a truncated domain";

  rep.H5 = {};
  if (!sweep || !sweep_omegas || sweep->size() < 3) {
    rep.H5.status = Status::Indeterminate;
    rep.H5.note = "no omega sweep configured";
  } else {
    const auto& L = *sweep;
    bool same = true;
    for (const auto& v : L) same = same && v.size() == L[0].size();
    double worst = 0.0;
    if (same) {
      for (size_t i = 1; i + 1 < L.size(); ++i)
        for (size_t j = 0; j < L[i].size(); ++j) worst = std::max(worst, std::abs(L[i + 1][j] - 2 * L[i][j] + L[i - 1][j]));
    }
    rep.H5.evidence["max_second_difference"] = worst;
    rep.H5.evidence["sweep_points"] = static_cast<double>(L.size());
    rep.H5.status = same && worst <= tol.tau_cont ? Status::Pass : Status::Fail;
    if (!same) rep.H5.note = "mode count changes along the sweep";
  }
}

}  // namespace rpl
