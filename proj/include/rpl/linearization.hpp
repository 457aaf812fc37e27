#pragma once
#include <vector>

#include "rpl/ground_state.hpp"
#include "rpl/status.hpp"

namespace rpl {

// Everything in symmetric coordinates v = sqrt(w) u unless stated otherwise.
struct Operators {
  RadialGrid grid{1, 1.0, 0.5, 2};
  double omega = 0.0;
  Vec phi;     // physical
  Vec dphi;    // physical
  Vec vplus;   // g + 2 g' phi^2
  Vec vminus;  // g
  Vec b;       // g' phi^2 (off-diagonal block)
  Band<double> lplus, lminus;
  Band<double> lplus_odd;  // d = 1 only (odd sector)
  double lminus_phi = 0.0;       // ||L- phi|| / ||phi||
  double lplus_dphi = 0.0;       // ||L+ dphi + phi|| / ||phi||
  double lplus_translation = 0.0;  // d = 1: ||L+ phi'|| / ||phi'||
};

Operators build_operators(const GroundState& gs, const Nonlinearity& nl, const RadialGrid& grid);
// same operators from arbitrary potential samples (zero potential gives the free case)
Operators operators_from_potentials(const RadialGrid& grid, double omega, const Vec& phi, const Vec& vplus,
                                    const Vec& vminus);

// H - shift, interleaved (upper_i, lower_i) -> rows 2i, 2i+1
Band<double> hamiltonian_band(const Operators& op, double shift = 0.0);
// [[L+, -lam], [-lam, L-]] interleaved; its negative count is the Sturm index
Band<double> sturm_matrix(const Operators& op, double lam);
// max over entries of |sigma1 H + H sigma1|
double sigma1_anticommutator(const Operators& op);

struct InternalMode {
  int j = 0;
  double lambda = 0.0;
  Vec xi_plus, xi_minus;  // physical, real
  double krein = 1.0;
  double residual = 0.0;          // ||H xi - lambda xi|| / ||xi||
  double composed_residual = 0.0; // ||L- L+ a - lambda^2 a|| / (lambda^2 ||a||), a = xi+ + xi-
  double mirror_residual = 0.0;   // sigma1 xi as eigenvector of -lambda
};

struct SpectralReport {
  double omega = 0.0;
  int morse_index = 0;
  int ker_lplus = 0;
  int ker_lminus = 0;
  std::vector<double> lplus_eigs, lminus_eigs, lplus_odd_eigs;
  int sturm_base = 0;
  int n_modes = 0;
  std::vector<double> lambdas;
  std::vector<double> dist_zero, dist_edge;
  double max_krein_cross = 0.0;
  double max_krein_defect = 0.0;
  double threshold_growth = 0.0;  // growth indicator of the zero-energy solution at omega
  bool threshold_checked = false;
  double vk_slope = 0.0;
  HypothesisStatus H1, H3, H4, H5;
};

struct SpectrumOptions {
  double lambda_min_frac = 1e-3;  // gap search starts at lambda_min_frac * omega
  double tol_eig = 1e-8;
  double tau_kernel = 1e-7;
};

struct SpectrumResult {
  SpectralReport report;
  std::vector<InternalMode> modes;
};

SpectrumResult discrete_spectrum(const Operators& op, const SpectrumOptions& opt = {});

// Krein normalization (sigma3 xi, xi) = 1 with a deterministic sign
InternalMode krein_normalize(const RadialGrid& grid, InternalMode mode);
// Krein Gram-Schmidt on a list and cross-term report
double krein_cross_defect(const RadialGrid& grid, const std::vector<InternalMode>& modes);

// growth indicator of the regular zero-energy solution at +omega (1: grows linearly, 0: bounded)
double threshold_growth(const Operators& op);

void check_assumptions(SpectralReport& rep, const Tolerances& tol,
                       const std::vector<std::vector<double>>* lambda_sweep = nullptr,
                       const std::vector<double>* sweep_omegas = nullptr);

}  // namespace rpl
