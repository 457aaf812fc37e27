#include "rpl/profile.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

const cplx I1(0.0, 1.0);

Vec interleave(const Vec& a, const Vec& b) {
  Vec x(2 * a.size());
  for (int i = 0; i < a.size(); ++i) {
    x[2 * i] = a[i];
    x[2 * i + 1] = b[i];
  }
  return x;
}

void deinterleave(const Vec& x, Vec& a, Vec& b) {
  const int n = static_cast<int>(x.size() / 2);
  a.resize(n);
  b.resize(n);
  for (int i = 0; i < n; ++i) {
    a[i] = x[2 * i];
    b[i] = x[2 * i + 1];
  }
}

bool pure_plus(const MultiIndex& m) {
  for (int j = 0; j < m.N(); ++j)
    if (m.minus(j) != 0) return false;
  return !m.is_zero();
}

// alpha with <piece + sum_b alpha_b (-i T_b), T_a> = 0 for all a
Eigen::VectorXd tangent_correction(const RadialGrid& grid, const std::vector<CVec>& T, const CVec& piece,
                                   double* cond = nullptr) {
  const int k = static_cast<int>(T.size());
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd b(k);
  for (int a = 0; a < k; ++a) {
    b[a] = -grid.inner(piece, T[a]);
    for (int c = 0; c < k; ++c) A(a, c) = grid.inner(CVec(-I1 * T[c]), T[a]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& s = svd.singularValues();
  double cn = s[k - 1] > 0 ? s[0] / s[k - 1] : INFINITY;
  if (cond) *cond = cn;
  if (!(cn < 1e12)) throw Error(ErrorKind::SingularProjection, "tangent Gram matrix is singular (cond " + std::to_string(cn) + ")");
  return A.fullPivLu().solve(b);
}

double rel_orth(const RadialGrid& grid, const std::vector<CVec>& T, const CVec& f) {
  double nf = grid.norm(f), m = 0.0;
  if (nf == 0.0) return 0.0;
  for (const auto& t : T) {
    double nt = grid.norm(t);
    if (nt > 0) m = std::max(m, std::abs(grid.inner(f, t)) / (nf * nt));
  }
  return m;
}

}  // namespace

FieldJet RefinedProfile::phi_jet() const {
  FieldJet f = FieldJet::zero(space, grid.size());
  for (const auto& [m, c] : coeffs) f[m] = c.phi;
  return f;
}

ScalarJet RefinedProfile::theta_jet() const {
  ScalarJet t = ScalarJet::zero(space);
  t.c[0] = omega;
  for (const auto& [m, c] : coeffs)
    if (c.kind == "lambda0") t[m] = c.theta;
  return t;
}

std::vector<ScalarJet> RefinedProfile::flow_jets() const {
  std::vector<ScalarJet> l(rs.N, ScalarJet::zero(space));
  for (int j = 0; j < rs.N; ++j) l[j][MultiIndex::unit(rs.N, j, true)] = modes[j].lambda;
  for (const auto& [m, c] : coeffs)
    for (const auto& [k, v] : c.lambda_tilde) l[k][m] = v;
  return l;
}

const FgrSource* RefinedProfile::source(const MultiIndex& m) const {
  for (const auto& s : sources)
    if (s.m == m) return &s;
  return nullptr;
}

FieldJet expand_nonlinearity(const FieldJet& phi, const Nonlinearity& nl) {
  const int K = phi.space->K(), n = phi.samples();
  if (K > 4)
    throw Error(ErrorKind::KTooLarge, "jet degree " + std::to_string(K) +
                                          " needs derivatives of g beyond order 4; lower K_max or use a case with larger eigenvalues");
  FieldJet s = phi * phi.conj();
  std::vector<Vec> t(K + 1, Vec(n));
  for (int i = 0; i < n; ++i) {
    auto d = nl.evaluate(s.c[0][i], K);
    double fact = 1.0;
    for (int k = 0; k <= K; ++k) {
      if (k > 1) fact *= k;
      t[k][i] = d[k] / fact;
    }
  }
  return compose(t, s) * phi;
}

FieldJet profile_rhs(const RadialGrid& grid, const Nonlinearity& nl, const FieldJet& phi, const ScalarJet& theta,
                     const std::vector<ScalarJet>& flow) {
  FieldJet r = expand_nonlinearity(phi, nl);
  for (size_t i = 0; i < r.c.size(); ++i) r.c[i] -= grid.laplacian(phi.c[i]);
  r += theta * phi;
  for (size_t j = 0; j < flow.size(); ++j) {
    r -= flow[j] * phi.dz(static_cast<int>(j), true);
    r += flow[j].conj() * phi.dz(static_cast<int>(j), false);
  }
  return r;
}

std::pair<Vec, Vec> known_terms(const RefinedProfile& partial, const MultiIndex& m) {
  const int d = m.norm();
  for (const auto& q : partial.rs.NR)
    if (q.norm() < d && !partial.coeffs.count(q))
      throw Error(ErrorKind::RecursionOrder, "coefficient " + q.str() + " needed before " + m.str());
  RefinedProfile p = partial;
  for (auto it = p.coeffs.begin(); it != p.coeffs.end();)
    it = it->first.norm() >= d ? p.coeffs.erase(it) : std::next(it);
  FieldJet r = profile_rhs(p.grid, p.nl, p.phi_jet(), p.theta_jet(), p.flow_jets());
  return {r.at(m), r.at(m.conj())};
}

SolvedPair solve_coefficient(const MultiIndex& m_in, const std::pair<Vec, Vec>& K_in, const Operators& op,
                             const std::vector<InternalMode>& modes, const ResonanceStructure& rs,
                             const ProfileOptions& opt) {
  const RadialGrid& grid = op.grid;
  const Vec& sw = grid.sqrt_weights();
  const int n = grid.size();
  MultiIndex m = m_in;
  std::pair<Vec, Vec> K = K_in;
  // solve with the member that lies in some Lambda_j as the primary index
  if (rs.lambda_sets(m).empty() && !rs.lambda_sets(m.conj()).empty()) {
    m = m.conj();
    std::swap(K.first, K.second);
  }
  const MultiIndex mb = m.conj();
  const bool self = m == mb;
  const double lm = lam(rs.lambdas, m);
  const bool in0 = rs.in_Lambda0(m);
  const std::vector<int> js = rs.lambda_sets(m);

  std::vector<std::pair<double, std::string>> pts = {{op.omega, "omega"}, {-op.omega, "-omega"}};
  if (!in0) pts.push_back({0.0, "0"});
  for (size_t j = 0; j < modes.size(); ++j) {
    if (std::find(js.begin(), js.end(), static_cast<int>(j)) == js.end())
      pts.push_back({modes[j].lambda, "lambda_" + std::to_string(j + 1)});
    pts.push_back({-modes[j].lambda, "-lambda_" + std::to_string(j + 1)});
  }
  for (const auto& [p, name] : pts)
    if (std::abs(lm - p) < opt.tau_res * op.omega)
      throw Error(ErrorKind::NearResonance, "lambda(" + m.str() + ") = " + std::to_string(lm) + " is within tau_res of " + name);

  SolvedPair out;
  out.a.m = m;
  out.b.m = mb;
  Vec Km = K.first.cwiseProduct(sw), Kb = K.second.cwiseProduct(sw);
  double kscale = std::sqrt(Km.squaredNorm() + Kb.squaredNorm());
  auto rel = [&](double r) { return kscale > 0 ? r / kscale : r; };

  if (in0 && self) {
    BandLU<double> lu(op.lplus);
    Vec x = lu.solve(Vec(-Km));
    out.a.phi = x.cwiseQuotient(sw);
    out.a.kind = "lambda0";
    out.a.solve_residual = rel((op.lplus.apply(x) + Km).norm());
    out.b = out.a;
    return out;
  }
  if (in0) {
    Band<double> A = sturm_matrix(op, lm);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2 * n, 1);
    for (int i = 0; i < n; ++i) C(2 * i + 1, 0) = op.phi[i] * sw[i];
    Vec f = -interleave(Vec(Km + Kb), Vec(Km - Kb));
    auto s = bordered_solve(A, C, C, f, Vec::Zero(1));
    Vec pp, pm;
    deinterleave(s.x, pp, pm);
    out.a.phi = (0.5 * (pp + pm)).cwiseQuotient(sw);
    out.b.phi = (0.5 * (pp - pm)).cwiseQuotient(sw);
    out.a.theta = 0.5 * s.y[0];
    out.b.theta = -0.5 * s.y[0];
    out.a.kind = out.b.kind = "lambda0";
    out.a.solve_residual = out.b.solve_residual = s.residual;
    return out;
  }
  Band<double> H = hamiltonian_band(op, lm);
  Vec f = interleave(Vec(-Km), Kb);
  if (!js.empty()) {
    const int k = static_cast<int>(js.size());
    Eigen::MatrixXd C(2 * n, k), D(2 * n, k);
    for (int c = 0; c < k; ++c) {
      const auto& md = modes[js[c]];
      Vec xp = md.xi_plus.cwiseProduct(sw), xm = md.xi_minus.cwiseProduct(sw);
      C.col(c) = -interleave(xp, xm);
      D.col(c) = interleave(xp, Vec(-xm));
    }
    auto s = bordered_solve(H, C, D, f, Vec::Zero(k));
    Vec a, b;
    deinterleave(s.x, a, b);
    out.a.phi = a.cwiseQuotient(sw);
    out.b.phi = b.cwiseQuotient(sw);
    for (int c = 0; c < k; ++c) {
      const auto& md = modes[js[c]];
      out.a.lambda_tilde[js[c]] = s.y[c];
      double expect = grid.inner(K.first, md.xi_plus) + grid.inner(K.second, md.xi_minus);
      out.a.lambda_tilde_defect = std::max(out.a.lambda_tilde_defect, std::abs(s.y[c] - expect));
    }
    out.a.kind = out.b.kind = "lambdaj";
    out.a.solve_residual = out.b.solve_residual = s.residual;
    return out;
  }
  BandLU<double> lu(H);
  Vec x = lu.solve(f);
  Vec a, b;
  deinterleave(x, a, b);
  out.a.phi = a.cwiseQuotient(sw);
  out.b.phi = b.cwiseQuotient(sw);
  out.a.kind = out.b.kind = "generic";
  out.a.solve_residual = out.b.solve_residual = rel((H.apply(x) - f).norm());
  if (self) out.b = out.a;
  return out;
}

Vec second_omega_derivative(const Operators& op, const Nonlinearity& nl) {
  const int n = op.grid.size();
  const Vec& sw = op.grid.sqrt_weights();
  Vec rhs(n);
  for (int i = 0; i < n; ++i) {
    double p = op.phi[i], d = op.dphi[i];
    auto g = nl.evaluate(p * p, 2);
    rhs[i] = -2.0 * d - (6.0 * p * g[1] + 4.0 * p * p * p * g[2]) * d * d;
  }
  BandLU<double> lu(op.lplus);
  return lu.solve(Vec(rhs.cwiseProduct(sw))).cwiseQuotient(sw);
}

RefinedProfile build_refined_profile(const GroundState& gs, const Nonlinearity& nl, const Operators& op,
                                     const std::vector<InternalMode>& modes, const ResonanceStructure& rs,
                                     const ProfileOptions& opt) {
  if (static_cast<int>(modes.size()) != rs.N)
    throw Error(ErrorKind::InvalidInput, "mode list and resonance structure disagree on N");
  if (!rs.ambiguous.empty())
    throw Error(ErrorKind::ClassificationAmbiguous, "index " + rs.ambiguous.front().str() + " sits on the continuum edge");
  const RadialGrid& grid = op.grid;
  RefinedProfile rp;
  rp.grid = grid;
  rp.nl = nl;
  rp.omega = gs.omega;
  rp.phi = gs.phi;
  rp.dphi = gs.dphi;
  rp.d2phi = second_omega_derivative(op, nl);
  rp.modes = modes;
  rp.rs = rs;
  const int N = rs.N, Kd = rs.K_max;
  if (Kd > 4)
    throw Error(ErrorKind::KTooLarge, "K_max = " + std::to_string(Kd) + " needs derivatives of g beyond order 4");
  rp.space = std::make_shared<JetSpace>(N, Kd);

  auto root = [&](const MultiIndex& m, const Vec& f) {
    ProfileCoefficient c;
    c.m = m;
    c.phi = f;
    c.kind = "root";
    rp.coeffs[m] = c;
  };
  root(MultiIndex(N), gs.phi);
  for (int j = 0; j < N; ++j) {
    root(MultiIndex::unit(N, j, true), modes[j].xi_plus);
    root(MultiIndex::unit(N, j, false), modes[j].xi_minus);
  }
  {
    FieldJet r = profile_rhs(grid, nl, rp.phi_jet(), rp.theta_jet(), rp.flow_jets());
    for (auto& [m, c] : rp.coeffs) {
      double scale = grid.norm(grid.laplacian(c.phi)) + op.omega * grid.norm(c.phi);
      c.residual = grid.norm(r.at(m)) / scale;
    }
  }

  for (int d = 2; d <= Kd; ++d) {
    std::vector<MultiIndex> level;
    std::map<MultiIndex, double> kscale;
    for (const auto& m : rs.NR) {
      if (m.norm() != d || rp.coeffs.count(m)) continue;
      auto K = known_terms(rp, m);
      auto sp = solve_coefficient(m, K, op, modes, rs, opt);
      double ks = std::sqrt(std::pow(grid.norm(K.first), 2) + std::pow(grid.norm(K.second), 2));
      rp.coeffs[sp.a.m] = sp.a;
      rp.coeffs[sp.b.m] = sp.b;
      kscale[sp.a.m] = kscale[sp.b.m] = ks;
      level.push_back(sp.a.m);
      if (sp.b.m != sp.a.m) level.push_back(sp.b.m);
    }
    FieldJet r = profile_rhs(grid, nl, rp.phi_jet(), rp.theta_jet(), rp.flow_jets());
    for (const auto& m : level) {
      double res = grid.norm(r.at(m));
      rp.coeffs[m].residual = kscale[m] > 0 ? res / kscale[m] : res;
    }
  }
  for (const auto& [m, c] : rp.coeffs) rp.max_residual = std::max(rp.max_residual, std::max(c.residual, c.solve_residual));

  if (!rs.R_min.empty()) {
    FieldJet r = profile_rhs(grid, nl, rp.phi_jet(), rp.theta_jet(), rp.flow_jets());
    std::vector<CVec> T;
    T.push_back(I1 * gs.phi.cast<cplx>());
    T.push_back(gs.dphi.cast<cplx>());
    for (const auto& md : modes) {
      T.push_back(CVec((md.xi_plus + md.xi_minus).cast<cplx>()));
      T.push_back(CVec(I1 * (md.xi_plus - md.xi_minus).cast<cplx>()));
    }
    for (const auto& m : rs.R_min) {
      if (!pure_plus(m)) continue;
      FgrSource s;
      s.m = m;
      s.r = lam(rs.lambdas, m);
      s.G_raw = r.at(m);
      s.Gbar_raw = r.at(m.conj());
      // z^m G + z^mbar Gbar = X (G + Gbar) + i Y (G - Gbar)
      CVec X = (s.G_raw + s.Gbar_raw).cast<cplx>();
      CVec Y = I1 * (s.G_raw - s.Gbar_raw).cast<cplx>();
      Eigen::VectorXd ax = tangent_correction(grid, T, X), ay = tangent_correction(grid, T, Y);
      for (size_t b = 0; b < T.size(); ++b) {
        X += ax[b] * (-I1 * T[b]);
        Y += ay[b] * (-I1 * T[b]);
      }
      s.orth_defect = std::max(rel_orth(grid, T, X), rel_orth(grid, T, Y));
      CVec Q = -I1 * Y;
      s.G = (0.5 * (X + Q)).real();
      s.Gbar = (0.5 * (X - Q)).real();
      s.sigma_norm = std::sqrt(std::pow(grid.sigma_norm(s.G, opt.sigma), 2) + std::pow(grid.sigma_norm(s.Gbar, opt.sigma), 2));
      rp.max_orth = std::max(rp.max_orth, s.orth_defect);
      rp.sources.push_back(s);
    }
  }
  return rp;
}

Assembled assemble(const RefinedProfile& rp, double omega, const std::vector<cplx>& z, double z_max) {
  if (static_cast<int>(z.size()) != rp.rs.N) throw Error(ErrorKind::InvalidInput, "z has the wrong length");
  const double w = omega - rp.omega;
  FieldJet f = rp.phi_jet();
  f.c[0] = rp.phi + w * rp.dphi + 0.5 * w * w * rp.d2phi;
  Assembled a;
  a.phi = f.eval(z);
  ScalarJet t = rp.theta_jet();
  t.c[0] = omega;
  a.theta = t.eval(z);
  auto l = rp.flow_jets();
  double zn = 0.0;
  for (int j = 0; j < rp.rs.N; ++j) {
    a.ztilde.push_back(-I1 * l[j].eval(z));
    zn += std::norm(z[j]);
  }
  a.outside_validity = std::sqrt(zn) > z_max;
  return a;
}

AssembledTangents assemble_tangents(const RefinedProfile& rp, double omega, const std::vector<cplx>& z) {
  const double w = omega - rp.omega;
  FieldJet f = rp.phi_jet();
  f.c[0] = rp.phi + w * rp.dphi + 0.5 * w * w * rp.d2phi;
  AssembledTangents t;
  t.phi = f.eval(z);
  t.domega = (rp.dphi + w * rp.d2phi).cast<cplx>();
  for (int j = 0; j < rp.rs.N; ++j) {
    CVec a = f.dz(j, true).eval(z), b = f.dz(j, false).eval(z);
    t.dzR.push_back(a + b);
    t.dzI.push_back(I1 * (a - b));
  }
  return t;
}

ResidualReport profile_residual(const RefinedProfile& rp, double omega, const std::vector<cplx>& z,
                                const ProfileOptions& opt) {
  const RadialGrid& grid = rp.grid;
  const int n = grid.size();
  Assembled a = assemble(rp, omega, z, opt.z_max);
  AssembledTangents tg = assemble_tangents(rp, omega, z);
  const CVec& phi = a.phi;
  CVec R = -grid.laplacian(phi) + a.theta * phi;
  for (int i = 0; i < n; ++i) R[i] += rp.nl.value(std::norm(phi[i])) * phi[i];
  for (int j = 0; j < rp.rs.N; ++j) {
    CVec dz = 0.5 * (tg.dzR[j] - I1 * tg.dzI[j]), dzb = 0.5 * (tg.dzR[j] + I1 * tg.dzI[j]);
    R -= I1 * (dz * a.ztilde[j] + dzb * std::conj(a.ztilde[j]));
  }
  std::vector<CVec> T;
  T.push_back(I1 * phi);
  T.push_back(tg.domega);
  for (int j = 0; j < rp.rs.N; ++j) {
    T.push_back(tg.dzR[j]);
    T.push_back(tg.dzI[j]);
  }
  ResidualReport out;
  Eigen::VectorXd al = tangent_correction(grid, T, R, &out.cond);
  for (size_t b = 0; b < T.size(); ++b) {
    R += al[b] * (-I1 * T[b]);
    out.correction.push_back(al[b]);
  }
  out.R = R;
  out.R1 = R;
  for (const auto& s : rp.sources) {
    out.R1 -= monomial(s.m, z) * s.G.cast<cplx>();
    out.R1 -= monomial(s.m.conj(), z) * s.Gbar.cast<cplx>();
  }
  out.norm_R = grid.norm(R);
  out.norm_R1 = grid.norm(out.R1);
  out.sigma_norm_R1 = grid.sigma_norm(out.R1, opt.sigma);
  out.max_orth = rel_orth(grid, T, R);
  out.outside_validity = a.outside_validity;
  return out;
}

std::string RefinedProfile::manifest_json() const {
  using nlohmann::json;
  auto idx = [](const MultiIndex& m) { return m.str(); };
  json j;
  j["omega"] = omega;
  j["N"] = rs.N;
  j["K_max"] = rs.K_max;
  json cs = json::array();
  for (const auto& [m, c] : coeffs) {
    json e{{"m", idx(m)}, {"kind", c.kind}, {"residual", c.residual}, {"solve_residual", c.solve_residual},
           {"norm", grid.norm(c.phi)}};
    if (c.kind == "lambda0") e["theta"] = c.theta;
    if (!c.lambda_tilde.empty()) {
      json lt = json::object();
      for (const auto& [k, v] : c.lambda_tilde) lt[std::to_string(k + 1)] = v;
      e["lambda_tilde"] = lt;
      e["lambda_tilde_defect"] = c.lambda_tilde_defect;
    }
    cs.push_back(e);
  }
  j["coefficients"] = cs;
  json ss = json::array();
  for (const auto& s : sources)
    ss.push_back({{"m", idx(s.m)}, {"r", s.r}, {"sigma_norm", s.sigma_norm}, {"orth_defect", s.orth_defect},
                  {"norm_G", grid.norm(s.G)}, {"norm_Gbar", grid.norm(s.Gbar)}});
  j["sources"] = ss;
  j["max_residual"] = max_residual;
  j["max_orth"] = max_orth;
  return j.dump(2);
}

}  // namespace rpl
