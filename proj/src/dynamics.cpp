#include "rpl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

const cplx I1(0.0, 1.0);

Band<cplx> cn_matrix(const RadialGrid& g, double dt, double sign) {
  Band<cplx> A = g.neg_laplacian().complexified();
  const int n = A.size(), k = A.bandwidth();
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - k); j <= std::min(n - 1, i + k); ++j) A(i, j) *= sign * I1 * 0.5 * dt;
  for (int i = 0; i < n; ++i) A(i, i) += 1.0;
  return A;
}

// in-place band LU without pivoting; false if a pivot collapses
bool lu_nopivot(Band<double>& a) {
  const int n = a.size(), k = a.bandwidth();
  for (int p = 0; p < n; ++p) {
    double piv = a(p, p);
    if (!(std::abs(piv) > 1e-10)) return false;
    int e = std::min(n - 1, p + k);
    for (int i = p + 1; i <= e; ++i) {
      double l = a(i, p) / piv;
      a(i, p) = l;
      if (l == 0.0) continue;
      for (int j = p + 1; j <= e; ++j) a(i, j) -= l * a(p, j);
    }
  }
  return true;
}

void lu_nopivot_solve(const Band<double>& a, Vec& b) {
  const int n = a.size(), k = a.bandwidth();
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - k); j < i; ++j) b[i] -= a.at(i, j) * b[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j <= std::min(n - 1, i + k); ++j) b[i] -= a.at(i, j) * b[j];
    b[i] /= a.at(i, i);
  }
}

// || (1 + r^2)^{-sigma/2} f ||
double local_norm(const RadialGrid& g, const CVec& f, double sigma) {
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) acc += g.weights()[i] * std::norm(f[i]) * std::pow(1.0 + g.r()[i] * g.r()[i], -sigma);
  return std::sqrt(acc);
}

double sponge_onset(const SimConfig& cfg) {
  return cfg.sponge.onset < 0 ? 0.8 * cfg.grid.R() : cfg.sponge.onset;
}

}  // namespace

void SimConfig::validate() const {
  nl.validate();
  if (!(dt > 0) || !(T > 0)) throw Error(ErrorKind::InvalidInput, "dt and T must be positive");
  if (stride < 1) throw Error(ErrorKind::InvalidInput, "sample stride must be >= 1");
  if (sponge.on) {
    double on = sponge.onset < 0 ? 0.8 * grid.R() : sponge.onset;
    if (!(on > 0 && on < grid.R())) throw Error(ErrorKind::InvalidInput, "sponge onset must lie inside (0, R)");
    if (!(sponge.strength >= 0)) throw Error(ErrorKind::InvalidInput, "sponge strength must be >= 0");
  }
  if (max_inner < 1) throw Error(ErrorKind::InvalidInput, "max_inner must be >= 1");
}

double mass_Q0(const RadialGrid& grid, const CVec& u) { return 0.5 * grid.inner(u, u); }

double energy(const RadialGrid& grid, const Nonlinearity& nl, const CVec& u) {
  const Vec& sw = grid.sqrt_weights();
  CVec v = u.cwiseProduct(sw.cast<cplx>());
  double kin = (v.conjugate().cwiseProduct(grid.neg_laplacian().apply(v))).sum().real();
  double pot = 0.0;
  for (int i = 0; i < grid.size(); ++i) pot += grid.weights()[i] * nl.primitive(std::norm(u[i]));
  return 0.5 * kin + 0.5 * pot;
}

SimState make_state(const RadialGrid& grid, const Nonlinearity& nl, const CVec& u, double t) {
  SimState s;
  s.t = t;
  s.u = u;
  s.Q0 = mass_Q0(grid, u);
  s.E = energy(grid, nl, u);
  return s;
}

Stepper::Stepper(const SimConfig& cfg)
    : cfg_(cfg), lap_(cfg.grid.neg_laplacian()), minus_(cn_matrix(cfg.grid, cfg.dt, -1.0)) {
  cfg_.validate();
  const Vec& r = cfg.grid.r();
  damp_ = Vec::Ones(cfg.grid.size());
  if (cfg.sponge.on) {
    double on = sponge_onset(cfg), R = cfg.grid.R();
    for (int i = 0; i < r.size(); ++i)
      if (r[i] > on) {
        double x = (r[i] - on) / (R - on);
        damp_[i] = std::exp(-cfg.sponge.strength * cfg.dt * x * x);
      }
  }
}

SimState Stepper::step(const SimState& s) const {
  const RadialGrid& g = cfg_.grid;
  const int n = g.size(), k = lap_.bandwidth();
  const Vec& sw = g.sqrt_weights();
  const Vec& w = g.weights();
  const double dt = cfg_.dt, h2 = 0.5 * dt;
  CVec v0 = s.u.cwiseProduct(sw.cast<cplx>());
  CVec base = minus_.apply(v0);
  Vec s0 = s.u.cwiseAbs2();
  double pmax = 0.0;
  for (int i = 0; i < n; ++i) pmax = std::max(pmax, std::abs(cfg_.nl.value(s0[i])));
  if (dt * pmax > cfg_.comfort)
    throw Error(ErrorKind::StepFailure, "dt * max|g| = " + std::to_string(dt * pmax) + " exceeds the comfort bound; use a smaller dt");

  // R(v) = (I + i dt/2 A) v - base + i dt/2 gbar (v + v0)
  Vec gm(n), dg(n);
  auto residual = [&](const CVec& v) {
    CVec Av = lap_.apply(v);
    CVec R(n);
    for (int i = 0; i < n; ++i) {
      cplx m = v[i] + v0[i];
      cplx ri = v[i] + I1 * h2 * Av[i] - base[i] + I1 * h2 * gm[i] * m;
      R[i] = ri;
    }
    return R;
  };
  auto update_g = [&](const CVec& v) {
    for (int i = 0; i < n; ++i) cfg_.nl.secant_pair(s0[i], std::norm(v[i]) / w[i], gm[i], dg[i]);
  };

  // real Jacobian, unknowns interleaved (Re v_i, Im v_i)
  auto jacobian = [&](const CVec& v) {
    Band<double> J(2 * n, 2 * k + 1);
    for (int i = 0; i < n; ++i) {
      for (int j = std::max(0, i - k); j <= std::min(n - 1, i + k); ++j) {
        double a = h2 * lap_.at(i, j);
        J(2 * i, 2 * j + 1) -= a;
        J(2 * i + 1, 2 * j) += a;
      }
      J(2 * i, 2 * i) += 1.0;
      J(2 * i + 1, 2 * i + 1) += 1.0;
      double c = h2 * gm[i];
      J(2 * i, 2 * i + 1) -= c;
      J(2 * i + 1, 2 * i) += c;
      cplx m = v[i] + v0[i];
      double kap = dt * dg[i] / w[i], x = v[i].real(), y = v[i].imag();
      J(2 * i, 2 * i) -= m.imag() * kap * x;
      J(2 * i, 2 * i + 1) -= m.imag() * kap * y;
      J(2 * i + 1, 2 * i) += m.real() * kap * x;
      J(2 * i + 1, 2 * i + 1) += m.real() * kap * y;
    }
    return J;
  };

  CVec v = v0;
  update_g(v);
  const double scale = std::max(v0.norm(), 1e-300);
  int it = 0;
  bool ok = false;
  Vec rr(2 * n);
  for (it = 1; it <= cfg_.max_inner; ++it) {
    CVec R = residual(v);
    for (int i = 0; i < n; ++i) {
      rr[2 * i] = -R[i].real();
      rr[2 * i + 1] = -R[i].imag();
    }
    Band<double> J = jacobian(v);
    Vec d = rr;
    Band<double> F = J;
    if (lu_nopivot(F))
      lu_nopivot_solve(F, d);
    else
      d = BandLU<double>(J).solve(rr);
    double dn = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx di(d[2 * i], d[2 * i + 1]);
      v[i] += di;
      dn += std::norm(di);
    }
    update_g(v);
    if (std::sqrt(dn) / scale <= cfg_.inner_tol) {
      ok = true;
      break;
    }
  }
  if (!ok) throw Error(ErrorKind::StepFailure, "nonlinear iteration did not converge at t = " + std::to_string(s.t) + "; use a smaller dt");
  SimState o;
  o.t = s.t + dt;
  o.u = v.cwiseQuotient(sw.cast<cplx>()).cwiseProduct(damp_.cast<cplx>());
  o.Q0 = mass_Q0(g, o.u);
  o.E = energy(g, cfg_.nl, o.u);
  o.inner = it;
  return o;
}

SimState step(const SimState& s, const SimConfig& cfg) { return Stepper(cfg).step(s); }

double z_unit(const RefinedProfile& rp) {
  double mx = 0.0;
  for (int j = 0; j < rp.rs.N; ++j) {
    auto it = rp.coeffs.find(MultiIndex::unit(rp.rs.N, j, true));
    if (it != rp.coeffs.end()) mx = std::max(mx, rp.grid.norm(it->second.phi));
  }
  return mx > 0 ? rp.grid.norm(rp.phi) / mx : 1.0;
}

CVec synthesize(const RefinedProfile& rp, const Theta& p) {
  return std::exp(I1 * p.theta) * assemble(rp, rp.omega + p.varpi, p.z).phi;
}

namespace {

// parameters packed as (theta, varpi, zR_1, zI_1, ...)
Theta unpack(const Eigen::VectorXd& x, int N) {
  Theta p;
  p.theta = x[0];
  p.varpi = x[1];
  for (int j = 0; j < N; ++j) p.z.push_back(cplx(x[2 + 2 * j], x[3 + 2 * j]));
  return p;
}

Eigen::VectorXd pack(const Theta& p) {
  Eigen::VectorXd x(2 + 2 * p.z.size());
  x[0] = p.theta;
  x[1] = p.varpi;
  for (size_t j = 0; j < p.z.size(); ++j) {
    x[2 + 2 * j] = p.z[j].real();
    x[3 + 2 * j] = p.z[j].imag();
  }
  return x;
}

struct Conditions {
  Eigen::VectorXd F;
  double defect = 0.0;
  CVec eta;
};

Conditions conditions(const CVec& u, const RefinedProfile& rp, const Theta& p, double unorm) {
  const RadialGrid& g = rp.grid;
  AssembledTangents t = assemble_tangents(rp, rp.omega + p.varpi, p.z);
  cplx ph = std::exp(I1 * p.theta);
  std::vector<CVec> T{I1 * t.phi, t.domega};
  for (int j = 0; j < rp.rs.N; ++j) {
    T.push_back(t.dzR[j]);
    T.push_back(t.dzI[j]);
  }
  Conditions c;
  c.eta = u - ph * t.phi;
  CVec ieta = I1 * c.eta;
  c.F.resize(T.size());
  for (size_t a = 0; a < T.size(); ++a) {
    CVec Ta = ph * T[a];
    c.F[a] = g.inner(ieta, Ta);
    double tn = g.norm(Ta);
    c.defect = std::max(c.defect, std::abs(c.F[a]) / std::max(tn * unorm, 1e-300));
  }
  return c;
}

}  // namespace

ModulationResult decompose(const CVec& u, const RefinedProfile& rp, const Theta& guess, const DecomposeOptions& opt) {
  const int N = rp.rs.N;
  if (static_cast<int>(guess.z.size()) != N) throw Error(ErrorKind::InvalidInput, "guess has the wrong number of z components");
  if (u.size() != rp.grid.size()) throw Error(ErrorKind::IncompatibleGrids, "field does not match the profile grid");
  const double phin = rp.grid.norm(rp.phi);
  const double zmax = opt.z_max > 0 ? opt.z_max : 0.25 * z_unit(rp);
  const double wmax = opt.varpi_max * rp.omega;
  const double unorm = std::max(rp.grid.norm(u), phin);
  Theta start = guess;
  {
    // phase alignment before Newton
    CVec f = synthesize(rp, start);
    cplx s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += rp.grid.weights()[i] * u[i] * std::conj(f[i]);
    if (std::abs(s) > 0) start.theta += std::arg(s);
  }
  Eigen::VectorXd x = pack(start);
  const int P = static_cast<int>(x.size());
  ModulationResult res;
  auto out_of_basin = [&](const Eigen::VectorXd& y) {
    Theta p = unpack(y, N);
    double zn = 0.0;
    for (auto z : p.z) zn += std::norm(z);
    return std::sqrt(zn) > zmax || std::abs(p.varpi) > wmax || !y.allFinite();
  };
  for (int it = 0; it <= opt.max_iter; ++it) {
    Conditions c = conditions(u, rp, unpack(x, N), unorm);
    res.iterations = it;
    if (c.defect <= opt.tol_mod) {
      double en = rp.grid.norm(c.eta);
      if (en > opt.eta_max * phin)
        throw Error(ErrorKind::NoConvergence, "remainder norm " + std::to_string(en / phin) + " of ||phi|| is outside the modulation neighbourhood");
      res.p = unpack(x, N);
      res.eta = c.eta;
      res.max_defect = c.defect;
      return res;
    }
    if (it == opt.max_iter) break;
    Eigen::MatrixXd J(P, P);
    for (int b = 0; b < P; ++b) {
      Eigen::VectorXd y = x;
      double hstep = 1e-7 * std::max(1.0, std::abs(x[b]));
      y[b] += hstep;
      J.col(b) = (conditions(u, rp, unpack(y, N), unorm).F - c.F) / hstep;
    }
    Eigen::VectorXd dx = J.fullPivLu().solve(-c.F);
    x += dx;
    if (out_of_basin(x)) throw Error(ErrorKind::NoConvergence, "modulation parameters left the basin (|z|, |varpi| limits)");
  }
  throw Error(ErrorKind::NoConvergence, "modulation Newton did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

CVec initial_field(const SimConfig& cfg, const RefinedProfile& rp) {
  if (!rp.grid.same_as(cfg.grid)) throw Error(ErrorKind::IncompatibleGrids, "simulation grid differs from the profile grid");
  CVec u = rp.phi.cast<cplx>();
  if (cfg.init.mode >= 0) {
    if (cfg.init.mode >= static_cast<int>(rp.modes.size())) throw Error(ErrorKind::InvalidInput, "initial data names a missing mode");
    const auto& md = rp.modes[cfg.init.mode];
    cplx z = cfg.init.amplitude * std::exp(I1 * cfg.init.phase);
    u += z * md.xi_plus.cast<cplx>() + std::conj(z) * md.xi_minus.cast<cplx>();
  }
  return std::exp(I1 * cfg.init.theta0) * u;
}

TimeSeries run_from(const SimConfig& cfg, const RefinedProfile& rp, const CVec& u0, const DecomposeOptions& dopt) {
  if (!rp.grid.same_as(cfg.grid)) throw Error(ErrorKind::IncompatibleGrids, "simulation grid differs from the profile grid");
  Stepper st(cfg);
  const int N = rp.rs.N;
  TimeSeries ts;
  ts.R_min = rp.rs.R_min;
  for (const auto& m : rp.modes) ts.lambdas.push_back(m.lambda);
  SimState s = make_state(cfg.grid, cfg.nl, u0);
  const double q00 = s.Q0, e00 = s.E;
  Theta guess;
  guess.z.assign(N, 0.0);
  const long nsteps = std::lround(cfg.T / cfg.dt);
  double S = 0.0;
  auto sample = [&]() {
    CVec uf = std::exp(-I1 * rp.omega * s.t) * s.u;
    ModulationResult mr = decompose(uf, rp, guess, dopt);
    guess = mr.p;
    ts.max_newton = std::max(ts.max_newton, mr.iterations);
    ts.t.push_back(s.t);
    ts.theta.push_back(mr.p.theta);
    ts.varpi.push_back(mr.p.varpi);
    ts.z.push_back(mr.p.z);
    std::vector<double> zm;
    double q = 0.0;
    for (const auto& m : ts.R_min) {
      double a = std::abs(monomial(m, mr.p.z));
      zm.push_back(a);
      q += a * a;
    }
    if (!ts.t.empty() && ts.t.size() > 1) {
      double dtS = ts.t.back() - ts.t[ts.t.size() - 2];
      double qprev = 0.0;
      for (double a : ts.zm.back()) qprev += a * a;
      S += 0.5 * dtS * (q + qprev);
    }
    ts.zm.push_back(zm);
    ts.S.push_back(S);
    ts.eta_local.push_back(local_norm(rp.grid, mr.eta, cfg.local_sigma));
    ts.Q0.push_back(s.Q0);
    ts.E.push_back(s.E);
    ts.q0_drift = std::max(ts.q0_drift, std::abs(s.Q0 - q00) / q00);
    ts.e_drift = std::max(ts.e_drift, std::abs(s.E - e00) / std::max(std::abs(e00), 1e-300));
  };
  sample();
  for (long k = 1; k <= nsteps; ++k) {
    s = st.step(s);
    ++ts.steps;
    if (k % cfg.stride == 0 || k == nsteps) sample();
  }
  return ts;
}

TimeSeries run(const SimConfig& cfg, const RefinedProfile& rp, const DecomposeOptions& dopt) {
  return run_from(cfg, rp, initial_field(cfg, rp), dopt);
}

DecayMetrics fgr_decay_report(const TimeSeries& ts, const std::vector<double>& lambdas, const DecayOptions& opt) {
  const int S = static_cast<int>(ts.t.size());
  if (S < 8) throw Error(ErrorKind::InsufficientData, "time series has fewer than 8 samples");
  const int N = static_cast<int>(lambdas.size());
  DecayMetrics m;
  const double T0 = ts.t.front(), T = ts.t.back() - T0;
  int first = 0;
  while (first < S && ts.t[first] - T0 < opt.transient * T) ++first;
  const int W = std::max(1, std::min(opt.windows, (S - first) / 2));
  if (S - first < 2 * W) throw Error(ErrorKind::InsufficientData, "too few samples after the transient");
  m.envelope.assign(N, std::vector<double>(W, 0.0));
  for (int j = 0; j < N; ++j) {
    for (int i = first; i < S; ++i) {
      int w = std::min(W - 1, (i - first) * W / (S - first));
      m.envelope[j][w] = std::max(m.envelope[j][w], std::abs(ts.z[i][j]));
    }
    const auto& e = m.envelope[j];
    for (int w = 0; w + 1 < W; ++w)
      if (e[w] > opt.floor) m.monotonicity_defect = std::max(m.monotonicity_defect, (e[w + 1] - e[w]) / e[w]);
    // drop measured from the start of the series
    double e0 = 0.0;
    for (int i = 0; i < S && ts.t[i] - T0 <= T / W; ++i) e0 = std::max(e0, std::abs(ts.z[i][j]));
    if (e.back() > opt.floor) m.envelope_drop = j == 0 ? e0 / e.back() : std::min(m.envelope_drop, e0 / e.back());
  }
  for (int j = 0; j < N; ++j)
    for (int i = 1; i + 1 < S; ++i) {
      cplx zd = (ts.z[i + 1][j] - ts.z[i - 1][j]) / (ts.t[i + 1] - ts.t[i - 1]);
      double a = std::abs(ts.z[i][j]);
      if (a <= opt.floor) continue;
      m.phase_consistency = std::max(m.phase_consistency, std::abs(zd + I1 * lambdas[j] * ts.z[i][j]) / std::max(a * a, opt.floor));
    }
  m.S_total = ts.S.back();
  if (m.S_total > 0) {
    double t34 = T0 + 0.75 * T;
    // S at 3T/4 by linear interpolation
    int k = 0;
    while (k + 1 < S && ts.t[k + 1] < t34) ++k;
    double s34 = ts.S[k];
    if (k + 1 < S) s34 += (ts.S[k + 1] - ts.S[k]) * (t34 - ts.t[k]) / (ts.t[k + 1] - ts.t[k]);
    m.S_last_quarter_share = (m.S_total - s34) / m.S_total;
  }
  // varpi on window means, which removes the fast 2 lambda ripple
  const int VW = std::max(4, opt.windows);
  std::vector<double> vsum(VW, 0.0), tsum(VW, 0.0);
  std::vector<int> cnt(VW, 0);
  for (int i = 0; i < S; ++i) {
    int w = std::min(VW - 1, static_cast<int>((ts.t[i] - T0) / T * VW));
    vsum[w] += ts.varpi[i];
    tsum[w] += ts.t[i];
    ++cnt[w];
  }
  double alo = 1e300, ahi = -1e300, flo = 1e300, fhi = -1e300;
  for (int w = 0; w < VW; ++w) {
    if (!cnt[w]) continue;
    double v = vsum[w] / cnt[w], tc = tsum[w] / cnt[w];
    alo = std::min(alo, v);
    ahi = std::max(ahi, v);
    if (tc - T0 >= 0.75 * T) {
      flo = std::min(flo, v);
      fhi = std::max(fhi, v);
    }
  }
  m.varpi_excursion = ahi - alo;
  m.varpi_final_oscillation = fhi >= flo ? fhi - flo : 0.0;
  m.varpi_ratio = m.varpi_excursion > 0 ? m.varpi_final_oscillation / m.varpi_excursion : 0.0;
  return m;
}

std::string time_series_csv(const TimeSeries& ts) {
  std::ostringstream o;
  const int N = ts.z.empty() ? 0 : static_cast<int>(ts.z[0].size());
  o << "t,theta,varpi";
  for (int j = 0; j < N; ++j) o << ",Re z_" << j + 1;
  for (int j = 0; j < N; ++j) o << ",Im z_" << j + 1;
  for (const auto& m : ts.R_min) o << ",|z^" << m.str() << "|";
  o << ",eta_local,Q0,E\n";
  char buf[40];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    o << buf;
  };
  for (size_t i = 0; i < ts.t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", ts.t[i]);
    o << buf;
    put(ts.theta[i]);
    put(ts.varpi[i]);
    for (int j = 0; j < N; ++j) put(ts.z[i][j].real());
    for (int j = 0; j < N; ++j) put(ts.z[i][j].imag());
    for (double a : ts.zm[i]) put(a);
    put(ts.eta_local[i]);
    put(ts.Q0[i]);
    put(ts.E[i]);
    o << "\n";
  }
  return o.str();
}

}  // namespace rpl
