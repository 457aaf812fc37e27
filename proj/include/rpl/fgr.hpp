#pragma once
#include <string>
#include <utility>
#include <vector>

#include "rpl/linearization.hpp"
#include "rpl/profile.hpp"

namespace rpl {

// H - z in symmetric coordinates with the discrete outgoing closure at R
// (exterior potential taken as zero); d = 1 or 3.
Band<cplx> closed_hamiltonian(const Operators& op, cplx z);

struct ResolventResult {
  CVec upper, lower;  // physical samples
  double residual = 0.0;
};

// solves (H - (lambda + i eps)) u = f; transparent = false keeps the Dirichlet box
ResolventResult resolvent_apply(const Operators& op, double lambda, double eps, const CVec& f_upper,
                                const CVec& f_lower, bool transparent = true);

struct FarField {
  cplx amplitude = 0.0;   // u_+ ~ A e^{i rho r} / r^{(d-1)/2}
  cplx lattice_amp = 0.0; // coefficient of mu^j in symmetric coordinates
  double kappa = 0.0;     // discrete wavenumber
  double flux = 0.0;      // per unit |lattice_amp|^2
  double match_residual = 0.0;
};

// outgoing solution of (H - r) u = -sigma3 (G, Gbar), amplitude of the upper component
FarField farfield_amplitude(const Operators& op, double r, const Vec& G, const Vec& Gbar, int window = 40,
                            double match_tol = 1e-6);

struct FgrOptions {
  double eps0_frac = 0.1;  // eps_0 = eps0_frac (r - omega)
  int steps = 6;
  double unresolved = 0.05;
  double tau_fgr = 1e-2;
  int window = 40;
};

struct FgrGram {
  int k = 0;
  double r = 0.0;
  std::vector<MultiIndex> members;
  Eigen::MatrixXd gamma;         // limiting absorption, extrapolated
  Eigen::MatrixXd gamma_shift;   // same with the eps sequence shifted by one step
  Eigen::MatrixXd gamma_direct;  // eps = 0 with the outgoing closure
  Eigen::MatrixXd gamma_ff;      // far-field flux
  std::vector<cplx> amplitudes;
  std::vector<double> eps;
  double min_eig = 0.0;
  double trace = 0.0;
  double hermitian_defect = 0.0;
  double extrapolation_change = 0.0;  // successive extrapolants, relative
  double shift_change = 0.0;
  double route_error = 0.0;           // LAP vs far field, relative
  double match_residual = 0.0;
  bool unresolved = false;
  Status status = Status::Indeterminate;
};

// Gram matrix for arbitrary generator pairs at threshold r
FgrGram fgr_gram_fields(const Operators& op, double r, const std::vector<std::pair<Vec, Vec>>& gens,
                        const FgrOptions& opt = {});
FgrGram fgr_gram(const RefinedProfile& rp, const Operators& op, int group, const FgrOptions& opt = {});

Status gram_status(const Eigen::MatrixXd& gamma, double tau_fgr, bool unresolved = false);
HypothesisStatus check_H7(const std::vector<FgrGram>& grams, double tau_fgr = 1e-2);

std::string gram_json(const FgrGram& g);

}  // namespace rpl
