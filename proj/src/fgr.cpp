#include "rpl/fgr.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

CVec interleave(const CVec& a, const CVec& b) {
  CVec x(2 * a.size());
  for (int i = 0; i < a.size(); ++i) {
    x[2 * i] = a[i];
    x[2 * i + 1] = b[i];
  }
  return x;
}

void deinterleave(const CVec& x, CVec& a, CVec& b) {
  const int n = static_cast<int>(x.size() / 2);
  a.resize(n);
  b.resize(n);
  for (int i = 0; i < n; ++i) {
    a[i] = x[2 * i];
    b[i] = x[2 * i + 1];
  }
}

Band<cplx> assemble_h(const Operators& op, const Band<cplx>& up, const Band<cplx>& lo, cplx z) {
  const int n = op.grid.size(), p = std::max(up.bandwidth(), lo.bandwidth());
  Band<cplx> H(2 * n, 2 * p);
  for (int i = 0; i < n; ++i) {
    double va = op.omega + 0.5 * (op.vplus[i] + op.vminus[i]);
    for (int j = std::max(0, i - p); j <= std::min(n - 1, i + p); ++j) {
      H(2 * i, 2 * j) = up.at(i, j);
      H(2 * i + 1, 2 * j + 1) = -lo.at(i, j);
    }
    H(2 * i, 2 * i) += va - z;
    H(2 * i + 1, 2 * i + 1) += -va - z;
    H(2 * i, 2 * i + 1) = op.b[i];
    H(2 * i + 1, 2 * i) = -op.b[i];
  }
  return H;
}

}  // namespace

Band<cplx> closed_hamiltonian(const Operators& op, cplx z) {
  const RadialGrid& g = op.grid;
  if (g.dimension() == 2) throw Error(ErrorKind::InvalidInput, "outgoing closure needs d = 1 or 3");
  // upper: (-D + omega - z) exterior, outgoing for z + i0; lower: (-D + omega + z)
  auto mu_up = g.exterior_roots(op.omega - z, -1.0);
  auto mu_lo = g.exterior_roots(op.omega + z, +1.0);
  Band<cplx> up = g.neg_laplacian_closed(g.ghost_matrix(mu_up));
  Band<cplx> lo = g.neg_laplacian_closed(g.ghost_matrix(mu_lo));
  return assemble_h(op, up, lo, z);
}

ResolventResult resolvent_apply(const Operators& op, double lambda, double eps, const CVec& f_upper,
                                const CVec& f_lower, bool transparent) {
  const RadialGrid& g = op.grid;
  if (f_upper.size() != g.size() || f_lower.size() != g.size())
    throw Error(ErrorKind::IncompatibleGrids, "right-hand side does not match the grid");
  cplx z(lambda, eps);
  Band<cplx> H;
  if (transparent) {
    H = closed_hamiltonian(op, z);
  } else {
    Band<cplx> lap = g.neg_laplacian().complexified();
    H = assemble_h(op, lap, lap, z);
  }
  const CVec sw = g.sqrt_weights().cast<cplx>();
  CVec f = interleave(f_upper.cwiseProduct(sw), f_lower.cwiseProduct(sw));
  BandLU<cplx> lu(H);
  if (eps == 0.0 && lu.rcond() < 1e-13)
    throw Error(ErrorKind::IllConditioned, "spectral parameter is (numerically) an eigenvalue");
  CVec x = lu.solve(f);
  ResolventResult out;
  double fn = f.norm();
  out.residual = fn > 0 ? (H.apply(x) - f).norm() / fn : 0.0;
  CVec a, b;
  deinterleave(x, a, b);
  out.upper = a.cwiseQuotient(sw);
  out.lower = b.cwiseQuotient(sw);
  return out;
}

FarField farfield_amplitude(const Operators& op, double r, const Vec& G, const Vec& Gbar, int window,
                            double match_tol) {
  const RadialGrid& g = op.grid;
  if (!(r > op.omega)) throw Error(ErrorKind::InvalidInput, "far-field amplitude needs r > omega");
  FarField ff;
  if (G.norm() == 0.0 && Gbar.norm() == 0.0) return ff;
  auto sol = resolvent_apply(op, r, 0.0, -G.cast<cplx>(), Gbar.cast<cplx>());
  auto mu = g.exterior_roots(op.omega - r, -1.0);
  // propagating root on the unit circle, evanescent one(s) inside
  int prop = 0;
  for (size_t k = 0; k < mu.size(); ++k)
    if (std::abs(std::abs(mu[k]) - 1.0) < std::abs(std::abs(mu[prop]) - 1.0)) prop = static_cast<int>(k);
  if (std::abs(std::abs(mu[prop]) - 1.0) > 1e-8) throw Error(ErrorKind::UnreliableAmplitude, "no propagating exterior root");
  const int n = g.size();
  window = std::min(window, n / 4);
  const int j0 = n - window;
  const Vec& sw = g.sqrt_weights();
  Eigen::MatrixXcd A(window, mu.size());
  CVec v(window);
  for (int t = 0; t < window; ++t) {
    v[t] = sol.upper[j0 + t] * sw[j0 + t];
    for (size_t k = 0; k < mu.size(); ++k) A(t, k) = std::pow(mu[k], t);
  }
  CVec c = A.colPivHouseholderQr().solve(v);
  ff.match_residual = v.norm() > 0 ? (A * c - v).norm() / v.norm() : 0.0;
  ff.kappa = std::arg(mu[prop]) / g.h();
  // coefficient of mu^j with absolute node index j
  ff.lattice_amp = c[prop] / std::pow(mu[prop], j0);
  ff.amplitude = ff.lattice_amp * std::exp(cplx(0.0, -0.5 * ff.kappa * g.h())) / std::sqrt(g.sphere_area() * g.h());
  auto a = g.interior_stencil();
  double J = 0.0;
  for (size_t k = 1; k < a.size(); ++k) J -= k * a[k] * std::sin(k * ff.kappa * g.h());
  ff.flux = J;
  if (ff.match_residual > match_tol)
    throw Error(ErrorKind::UnreliableAmplitude,
                "radiation matching residual " + std::to_string(ff.match_residual) + " over the last " + std::to_string(window) + " nodes");
  return ff;
}

Status gram_status(const Eigen::MatrixXd& gamma, double tau_fgr, bool unresolved) {
  const int M = static_cast<int>(gamma.rows());
  if (M == 0) return Status::Skipped;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma + gamma.transpose()));
  double mn = es.eigenvalues().minCoeff(), tr = gamma.trace();
  if (!(tr > 0) || mn <= 1e-10 * std::abs(tr)) return Status::Fail;
  if (unresolved) return Status::Indeterminate;
  return mn > tau_fgr * tr / M ? Status::Pass : Status::Indeterminate;
}

FgrGram fgr_gram_fields(const Operators& op, double r, const std::vector<std::pair<Vec, Vec>>& gens,
                        const FgrOptions& opt) {
  const RadialGrid& g = op.grid;
  const int M = static_cast<int>(gens.size());
  if (!(r > op.omega)) throw Error(ErrorKind::InvalidInput, "threshold r must exceed omega");
  FgrGram out;
  out.r = r;
  const Vec& sw = g.sqrt_weights();
  std::vector<CVec> rhs;  // G in symmetric coordinates, interleaved
  for (const auto& [a, b] : gens) rhs.push_back(interleave(a.cwiseProduct(sw).cast<cplx>(), b.cwiseProduct(sw).cast<cplx>()));
  std::vector<CVec> srhs = rhs;  // sigma3 G
  for (auto& x : srhs)
    for (int i = 1; i < x.size(); i += 2) x[i] = -x[i];

  auto gamma_at = [&](cplx z) {
    Band<cplx> H = closed_hamiltonian(op, z);
    BandLU<cplx> lu(H);
    Eigen::MatrixXcd Mz(M, M);
    std::vector<CVec> u(M);
    for (int a = 0; a < M; ++a) u[a] = lu.solve(srhs[a]);
    for (int a = 0; a < M; ++a)
      for (int b = 0; b < M; ++b) Mz(a, b) = u[a].cwiseProduct(rhs[b]).sum();
    out.hermitian_defect = std::max(out.hermitian_defect, (Mz - Mz.transpose()).norm() / std::max(Mz.norm(), 1e-300));
    Eigen::MatrixXd G = Mz.imag();
    return Eigen::MatrixXd(0.5 * (G + G.transpose()));
  };

  const double e0 = opt.eps0_frac * (r - op.omega);
  std::vector<Eigen::MatrixXd> vals;
  for (int i = 0; i <= opt.steps; ++i) {
    double e = e0 * std::pow(0.5, i);
    out.eps.push_back(e);
    vals.push_back(gamma_at(cplx(r, e)));
  }
  // Richardson in eps with halving, eliminating eps and eps^2
  auto extrapolate = [&](int first, int last, Eigen::MatrixXd& prev) {
    std::vector<std::vector<Eigen::MatrixXd>> T;
    for (int i = first; i <= last; ++i) {
      std::vector<Eigen::MatrixXd> row{vals[i]};
      for (int k = 1; k <= 2 && k <= i - first; ++k) {
        double f = std::pow(2.0, k);
        row.push_back((f * row[k - 1] - T.back()[k - 1]) / (f - 1.0));
      }
      T.push_back(row);
    }
    prev = T[T.size() - 2].back();
    return T.back().back();
  };
  Eigen::MatrixXd prev, prev2;
  out.gamma = extrapolate(0, opt.steps - 1, prev);
  out.gamma_shift = extrapolate(1, opt.steps, prev2);
  double gn = std::max(out.gamma.norm(), 1e-300);
  out.extrapolation_change = (out.gamma - prev).norm() / gn;
  out.shift_change = (out.gamma_shift - out.gamma).norm() / gn;
  out.unresolved = out.extrapolation_change > opt.unresolved;

  out.gamma_direct = gamma_at(cplx(r, 0.0));

  out.gamma_ff = Eigen::MatrixXd::Zero(M, M);
  std::vector<FarField> ffs;
  for (const auto& [a, b] : gens) {
    ffs.push_back(farfield_amplitude(op, r, a, b, opt.window));
    out.amplitudes.push_back(ffs.back().amplitude);
    out.match_residual = std::max(out.match_residual, ffs.back().match_residual);
  }
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      out.gamma_ff(a, b) = ffs[a].flux * std::real(ffs[a].lattice_amp * std::conj(ffs[b].lattice_amp));
  out.route_error = (out.gamma - out.gamma_ff).norm() / gn;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.gamma);
  out.min_eig = M ? es.eigenvalues().minCoeff() : 0.0;
  out.trace = out.gamma.trace();
  out.status = gram_status(out.gamma, opt.tau_fgr, out.unresolved);
  return out;
}

FgrGram fgr_gram(const RefinedProfile& rp, const Operators& op, int group, const FgrOptions& opt) {
  if (group < 0 || group >= static_cast<int>(rp.rs.groups.size())) throw Error(ErrorKind::InvalidInput, "no such resonance group");
  const auto& grp = rp.rs.groups[group];
  std::vector<std::pair<Vec, Vec>> gens;
  for (const auto& m : grp.members) {
    const FgrSource* s = rp.source(m);
    if (!s) throw Error(ErrorKind::InvalidInput, "no generator stored for " + m.str());
    gens.push_back({s->G, s->Gbar});
  }
  FgrGram out = fgr_gram_fields(op, grp.r, gens, opt);
  out.k = group;
  out.members = grp.members;
  return out;
}

HypothesisStatus check_H7(const std::vector<FgrGram>& grams, double tau_fgr) {
  HypothesisStatus h;
  if (grams.empty()) {
    h.status = Status::Skipped;
    h.note = "no resonance groups";
    return h;
  }
  h.status = Status::Pass;
  for (const auto& g : grams) {
    Status s = gram_status(g.gamma, tau_fgr, g.unresolved);
    std::string key = "group" + std::to_string(g.k + 1);
    h.evidence[key + "_min_eig"] = g.min_eig;
    h.evidence[key + "_trace"] = g.trace;
    if (s == Status::Fail)
      h.status = Status::Fail;
    else if (s == Status::Indeterminate && h.status == Status::Pass)
      h.status = Status::Indeterminate;
  }
  return h;
}

std::string gram_json(const FgrGram& g) {
  using nlohmann::json;
  auto mat = [](const Eigen::MatrixXd& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      a.push_back(row);
    }
    return a;
  };
  json j;
  j["k"] = g.k + 1;
  j["r"] = g.r;
  json mem = json::array();
  for (const auto& m : g.members) mem.push_back(m.str());
  j["members"] = mem;
  j["M"] = g.members.size();
  j["gamma"] = mat(g.gamma);
  j["gamma_direct"] = mat(g.gamma_direct);
  j["gamma_farfield"] = mat(g.gamma_ff);
  json amps = json::array();
  for (auto a : g.amplitudes) amps.push_back({a.real(), a.imag()});
  j["amplitudes"] = amps;
  j["eps"] = g.eps;
  j["min_eig"] = g.min_eig;
  j["trace"] = g.trace;
  j["hermitian_defect"] = g.hermitian_defect;
  j["extrapolation_change"] = g.extrapolation_change;
  j["shift_change"] = g.shift_change;
  j["route_error"] = g.route_error;
  j["match_residual"] = g.match_residual;
  j["unresolved"] = g.unresolved;
  j["status"] = status_name(g.status);
  return j.dump(2);
}

}  // namespace rpl
