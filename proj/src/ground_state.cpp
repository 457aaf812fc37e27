#include "rpl/ground_state.hpp"

#include <cmath>

#include "rpl/errors.hpp"

namespace rpl {

namespace {

struct ShotResult {
  int verdict;  // +1 overshoot (crosses zero), -1 undershoot (turns up), 0 reached rmax
  double r_stop;
};

// u'' = -(d-1)/r u' + omega u + g(u^2) u
ShotResult shoot(const Nonlinearity& nl, double omega, int d, double a, double rmax, double dr,
                 std::vector<double>* trace = nullptr) {
  auto rhs = [&](double r, double u, double p, double& du, double& dp) {
    du = p;
    dp = -(d - 1) / r * p + omega * u + nl.value(u * u) * u;
  };
  double r = dr;
  double c = (omega * a + nl.value(a * a) * a) / (2.0 * d);
  double u = a + c * r * r, p = 2.0 * c * r;
  if (trace) trace->push_back(u);
  while (r < rmax) {
    double k1u, k1p, k2u, k2p, k3u, k3p, k4u, k4p;
    rhs(r, u, p, k1u, k1p);
    rhs(r + dr / 2, u + dr / 2 * k1u, p + dr / 2 * k1p, k2u, k2p);
    rhs(r + dr / 2, u + dr / 2 * k2u, p + dr / 2 * k2p, k3u, k3p);
    rhs(r + dr, u + dr * k3u, p + dr * k3p, k4u, k4p);
    u += dr / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    p += dr / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
    r += dr;
    if (trace) trace->push_back(u);
    if (u < 0) return {+1, r};
    if (p > 0) return {-1, r};
  }
  return {0, r};
}

}  // namespace

Band<double> lplus_sym(const RadialGrid& grid, const Nonlinearity& nl, double omega, const Vec& phi, Parity parity) {
  Band<double> L = grid.neg_laplacian(parity);
  for (int i = 0; i < grid.size(); ++i) {
    double s = phi[i] * phi[i];
    auto g = nl.evaluate(s, 1);
    L(i, i) += omega + g[0] + 2.0 * g[1] * s;
  }
  return L;
}

Band<double> lminus_sym(const RadialGrid& grid, const Nonlinearity& nl, double omega, const Vec& phi, Parity parity) {
  Band<double> L = grid.neg_laplacian(parity);
  for (int i = 0; i < grid.size(); ++i) L(i, i) += omega + nl.value(phi[i] * phi[i]);
  return L;
}

double shoot_amplitude(const Nonlinearity& nl, double omega, int dimension, double rmax) {
  double dr = std::min(0.01, 0.05 / std::sqrt(omega));
  double lo = 1e-6, hi = 1.0;
  int guard = 0;
  while (shoot(nl, omega, dimension, hi, rmax, dr).verdict != +1) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw Error(ErrorKind::NoGroundState, "no overshooting amplitude found for omega = " + std::to_string(omega));
  }
  if (shoot(nl, omega, dimension, lo, rmax, dr).verdict == +1) {
    // lo may overshoot for tiny amplitudes only if the problem is degenerate
    throw Error(ErrorKind::NoGroundState, "shooting bracket not found for omega = " + std::to_string(omega));
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    int v = shoot(nl, omega, dimension, mid, rmax, dr).verdict;
    if (v == +1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

Vec shooting_profile(const Nonlinearity& nl, double omega, const RadialGrid& grid) {
  const int d = grid.dimension();
  double a = shoot_amplitude(nl, omega, d, grid.R());
  // integrate on a half-step lattice so that grid nodes are hit exactly
  double dr = 0.5 * grid.h();
  std::vector<double> trace;
  ShotResult res = shoot(nl, omega, d, a, grid.R(), dr, &trace);
  // trace[k] sits at r = (k+1) dr; node i sits at r = (2i+1) dr -> k = 2i
  Vec phi(grid.size());
  double k = std::sqrt(omega);
  // the shot departs from the decaying branch near r_stop; keep a few decay lengths before it
  double r_cut = res.verdict == 0 ? grid.R() : res.r_stop - 3.0 / k;
  int cut = -1;
  for (int i = 0; i < grid.size(); ++i) {
    size_t idx = 2 * static_cast<size_t>(i);
    if (idx >= trace.size() || grid.r()[i] > r_cut || trace[idx] <= 0) break;
    phi[i] = trace[idx];
    cut = i;
  }
  if (cut < 1) throw Error(ErrorKind::NoGroundState, "shooting profile degenerate");
  for (int i = cut + 1; i < grid.size(); ++i) {
    double r0 = grid.r()[cut], r = grid.r()[i];
    phi[i] = phi[cut] * std::exp(-k * (r - r0)) * std::pow(r0 / r, 0.5 * (d - 1));
  }
  return phi;
}

double profile_residual(const RadialGrid& grid, const Nonlinearity& nl, double omega, const Vec& v, Vec& F) {
  const Vec& sw = grid.sqrt_weights();
  F = grid.neg_laplacian().apply(v);
  for (int i = 0; i < grid.size(); ++i) {
    double u = v[i] / sw[i];
    F[i] += (omega + nl.value(u * u)) * v[i];
  }
  return F.norm() / (omega * v.norm());
}

}  // namespace

GroundState solve_ground_state(const Nonlinearity& nl, double omega, const RadialGrid& grid, const std::optional<Vec>& init,
                               const GroundStateOptions& opt) {
  if (!(omega > 0)) throw Error(ErrorKind::InvalidInput, "omega must be positive");
  nl.validate();
  Vec phi = init ? *init : shooting_profile(nl, omega, grid);
  if (phi.size() != grid.size()) throw Error(ErrorKind::IncompatibleGrids, "initial profile size differs from grid");
  const Vec& sw = grid.sqrt_weights();
  Vec v = phi.cwiseProduct(sw);
  Vec F;
  double res = profile_residual(grid, nl, omega, v, F);
  int it = 0;
  for (; it < opt.max_newton && res > opt.tol; ++it) {
    Vec u = v.cwiseQuotient(sw);
    BandLU<double> lu(lplus_sym(grid, nl, omega, u));
    Vec dv = lu.solve(F);
    double step = 1.0;
    Vec trial, Ft;
    double rt = 0.0;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      trial = v - step * dv;
      rt = profile_residual(grid, nl, omega, trial, Ft);
      if (rt < res || ls == 29) break;
    }
    v = trial;
    F = Ft;
    res = rt;
  }
  if (!(res <= opt.tol))
    throw Error(ErrorKind::ConvergenceFailure,
                "Newton residual " + std::to_string(res) + " after " + std::to_string(it) +
                    " iterations; try a finer grid or a different omega");
  GroundState gs;
  gs.omega = omega;
  gs.phi = v.cwiseQuotient(sw);
  gs.residual = res;
  gs.newton_iterations = it;
  double pmax = gs.phi.maxCoeff();
  if (gs.phi[0] <= 0 || gs.phi.minCoeff() < -1e-12 * pmax)
    throw Error(ErrorKind::NoGroundState, "converged profile is not positive (excited state?)");
  gs.mass = grid.inner(gs.phi, gs.phi);
  BandLU<double> lu(lplus_sym(grid, nl, omega, gs.phi));
  Vec dv = lu.solve(-v);
  gs.dphi = dv.cwiseQuotient(sw);
  gs.dmass = 2.0 * grid.inner(gs.phi, gs.dphi);
  Vec chk = lplus_sym(grid, nl, omega, gs.phi).apply(dv) + v;
  gs.dphi_residual = chk.norm() / v.norm();
  return gs;
}

std::vector<VkEntry> vk_from_masses(const std::vector<double>& om, const std::vector<double>& ms, double tau) {
  if (om.size() < 3 || ms.size() != om.size()) throw Error(ErrorKind::InvalidInput, "vk_check needs >= 3 omega points");
  std::vector<VkEntry> out;
  const size_t n = om.size();
  for (size_t i = 0; i < n; ++i) {
    // three-point derivative on a possibly non-uniform grid
    size_t a = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
    double x0 = om[a], x1 = om[a + 1], x2 = om[a + 2], x = om[i];
    double d0 = (2 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
    double d1 = (2 * x - x0 - x2) / ((x1 - x0) * (x1 - x2));
    double d2 = (2 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    double slope = d0 * ms[a] + d1 * ms[a + 1] + d2 * ms[a + 2];
    out.push_back({om[i], ms[i], slope, std::nan(""), slope > tau});
  }
  return out;
}

std::vector<VkEntry> vk_check(const Nonlinearity& nl, const std::vector<double>& omegas, const RadialGrid& grid,
                              double tau) {
  if (omegas.size() < 3) throw Error(ErrorKind::InvalidInput, "vk_check needs >= 3 omega points");
  std::vector<double> masses, exact;
  std::optional<Vec> warm;
  for (double w : omegas) {
    GroundState gs = solve_ground_state(nl, w, grid, warm);
    warm = gs.phi;
    masses.push_back(gs.mass);
    exact.push_back(gs.dmass);
  }
  auto out = vk_from_masses(omegas, masses, tau);
  for (size_t i = 0; i < out.size(); ++i) out[i].slope_exact = exact[i];
  return out;
}

double virial_defect(const RadialGrid& grid, const Vec& phi) {
  Vec dp = grid.derivative(phi);
  Vec rp = grid.r().cwiseProduct(phi);
  double m = grid.inner(phi, phi);
  return (grid.inner(rp, dp) + 0.5 * grid.dimension() * m) / m;
}

}  // namespace rpl
