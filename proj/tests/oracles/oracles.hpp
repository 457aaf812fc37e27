#pragma once
// Closed forms and brute-force references shared by the unit and acceptance tests.
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <vector>

#include "rpl/jet.hpp"
#include "rpl/linearization.hpp"
#include "rpl/resonance.hpp"

namespace oracle {

// 1D cubic focusing NLS, g(s) = -s: phi = sqrt(2 w) sech(sqrt(w) x)
inline double sech_ground_state(double omega, double x) {
  return std::sqrt(2.0 * omega) / std::cosh(std::sqrt(omega) * x);
}
inline double sech_mass(double omega) { return 4.0 * std::sqrt(omega); }
inline double sech_mass_slope(double omega) { return 2.0 / std::sqrt(omega); }

// Poschl-Teller: L+ = -d^2 + w - 6 w sech^2 has -3w (even) and 0 (odd) below w
inline double lplus_even_ground(double omega) { return -3.0 * omega; }
inline double lplus_odd_ground(double) { return 0.0; }

// free linear flow i u_t = -u_xx of exp(-x^2/2)
inline std::complex<double> free_gaussian(double x, double t) {
  std::complex<double> a(1.0, 2.0 * t);
  return std::exp(-x * x / (2.0 * a)) / std::sqrt(a);
}

// Gram entry for the zero potential and a Gaussian generator exp(-r^2/2):
// pi/(2 rho) |S^{d-1}| rho^{d-1} |G^(rho)|^2 with the unitary transform G^(k) = exp(-k^2/2)
inline double free_fgr_gaussian(int d, double omega, double r, double sphere_area) {
  double rho = std::sqrt(r - omega);
  return std::numbers::pi / (2.0 * rho) * sphere_area * std::pow(rho, d - 1) * std::exp(-rho * rho);
}

inline rpl::Operators free_operators(const rpl::RadialGrid& g, double omega) {
  rpl::Vec z = rpl::Vec::Zero(g.size());
  return rpl::operators_from_potentials(g, omega, z, z, z);
}

// Direct-definition classification over all indices with norm <= deg.
struct BruteForce {
  std::vector<rpl::MultiIndex> all, R, R_min, I, NR, Lambda0;
  std::vector<std::vector<rpl::MultiIndex>> Lambda;
  bool contains(const std::vector<rpl::MultiIndex>& v, const rpl::MultiIndex& m) const {
    for (const auto& x : v)
      if (x == m) return true;
    return false;
  }
};

inline bool brute_preceq(const rpl::MultiIndex& a, const rpl::MultiIndex& b) {
  for (int j = 0; j < a.N(); ++j)
    if (a.plus(j) + a.minus(j) > b.plus(j) + b.minus(j)) return false;
  return true;
}
inline bool brute_prec(const rpl::MultiIndex& a, const rpl::MultiIndex& b) {
  return brute_preceq(a, b) && a.norm() < b.norm();
}

inline std::vector<rpl::MultiIndex> all_indices(int N, int deg) {
  std::vector<rpl::MultiIndex> out;
  std::vector<int> e(2 * N, 0);
  // odometer over [0, deg]^{2N}, keep norm <= deg
  while (true) {
    int s = 0;
    for (int v : e) s += v;
    if (s <= deg) {
      rpl::MultiIndex m(N);
      m.e = e;
      out.push_back(m);
    }
    int k = 0;
    while (k < 2 * N && ++e[k] > deg) e[k++] = 0;
    if (k == 2 * N) break;
  }
  return out;
}

inline BruteForce brute_classify(const std::vector<double>& lambdas, double omega, double tau, int deg) {
  const int N = static_cast<int>(lambdas.size());
  BruteForce b;
  b.all = all_indices(N, deg);
  b.Lambda.resize(N);
  auto lam = [&](const rpl::MultiIndex& m) {
    double s = 0;
    for (int j = 0; j < N; ++j) s += lambdas[j] * (m.plus(j) - m.minus(j));
    return s;
  };
  for (const auto& m : b.all)
    if (std::abs(lam(m)) > omega + tau) b.R.push_back(m);
  for (const auto& m : b.R) {
    bool minimal = true;
    for (const auto& q : b.R)
      if (brute_prec(q, m)) minimal = false;
    if (minimal) b.R_min.push_back(m);
  }
  for (const auto& m : b.all) {
    bool dominated = false;
    for (const auto& q : b.R_min)
      if (brute_prec(q, m)) dominated = true;
    if (dominated)
      b.I.push_back(m);
    else if (!b.contains(b.R_min, m))
      b.NR.push_back(m);
  }
  for (const auto& m : b.NR) {
    if (m.norm() > 0 && std::abs(lam(m)) <= tau) b.Lambda0.push_back(m);
    for (int j = 0; j < N; ++j)
      if (std::abs(lam(m) - lambdas[j]) <= tau) b.Lambda[j].push_back(m);
  }
  return b;
}

// Hand expansion of g(|phi|^2) phi for g(s) = -s^2 with
// phi = p + z X + zbar Y + z^2 a + |z|^2 b + zbar^2 c (N = 1, real coefficients).
struct HandJet {
  rpl::Vec c0, cz, czb, czz, czzb, czbzb;
};

inline HandJet hand_quintic(const rpl::Vec& p, const rpl::Vec& X, const rpl::Vec& Y, const rpl::Vec& a,
                            const rpl::Vec& b, const rpl::Vec& c) {
  HandJet h;
  rpl::Vec p2 = p.array().square(), p3 = p2.cwiseProduct(p), p4 = p2.cwiseProduct(p2);
  rpl::Vec S = X + Y;
  h.c0 = -(p4.cwiseProduct(p));
  // first order: -(g + g' p^2) X - g' p^2 Y with g = -p^4, g' = -2 p^2
  h.cz = -3.0 * p4.cwiseProduct(X) - 2.0 * p4.cwiseProduct(Y);
  h.czb = -3.0 * p4.cwiseProduct(Y) - 2.0 * p4.cwiseProduct(X);
  // second order, from -s^2 phi with s = p^2 + s1 + s2
  rpl::Vec XY = X.cwiseProduct(Y), S2 = S.cwiseProduct(S);
  h.czz = -(2.0 * p3.cwiseProduct(XY + p.cwiseProduct(a + c)) + p3.cwiseProduct(S2) +
            2.0 * p3.cwiseProduct(S.cwiseProduct(X)) + p4.cwiseProduct(a));
  h.czbzb = -(2.0 * p3.cwiseProduct(XY + p.cwiseProduct(a + c)) + p3.cwiseProduct(S2) +
              2.0 * p3.cwiseProduct(S.cwiseProduct(Y)) + p4.cwiseProduct(c));
  h.czzb = -(2.0 * p3.cwiseProduct(X.cwiseProduct(X) + Y.cwiseProduct(Y) + 2.0 * p.cwiseProduct(b)) +
             4.0 * p3.cwiseProduct(S2) + p4.cwiseProduct(b));
  return h;
}

}  // namespace oracle
