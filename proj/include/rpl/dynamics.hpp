#pragma once
#include <string>
#include <vector>

#include "rpl/profile.hpp"

namespace rpl {

struct Sponge {
  bool on = true;
  double onset = -1.0;    // radius; negative means 0.8 R
  double strength = 1.0;  // damping rate at R
};

// ground state plus z xi_{j+} + conj(z) xi_{j-}, z = amplitude e^{i phase}
struct InitialData {
  int mode = -1;  // zero-based; -1 leaves the soliton unperturbed
  double amplitude = 0.0;
  double phase = 0.0;
  double theta0 = 0.0;  // global gauge
};

struct SimConfig {
  RadialGrid grid{1, 1.0, 0.5, 2};
  Nonlinearity nl;
  double dt = 0.01;
  double T = 10.0;
  Sponge sponge;
  InitialData init;
  int stride = 10;       // steps between samples
  int max_inner = 8;
  double inner_tol = 1e-12;
  double comfort = 0.5;  // bound on dt * max|potential|
  double local_sigma = 4.0;  // weight of the local remainder norm

  void validate() const;
};

struct SimState {
  double t = 0.0;
  CVec u;  // physical samples
  double Q0 = 0.0;
  double E = 0.0;
  int inner = 0;  // fixed-point iterations of the last step
};

double mass_Q0(const RadialGrid& grid, const CVec& u);
double energy(const RadialGrid& grid, const Nonlinearity& nl, const CVec& u);

// conservative Crank-Nicolson; the implicit stage is solved by Newton on the real form
class Stepper {
 public:
  explicit Stepper(const SimConfig& cfg);
  SimState step(const SimState& s) const;
  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
  Band<double> lap_;  // A = -Laplacian, symmetric coordinates
  Band<cplx> minus_;  // I - i dt/2 A
  Vec damp_;
};

SimState make_state(const RadialGrid& grid, const Nonlinearity& nl, const CVec& u, double t = 0.0);
SimState step(const SimState& s, const SimConfig& cfg);

struct Theta {
  double theta = 0.0;
  double varpi = 0.0;  // omega - omega*
  std::vector<cplx> z;
};

struct ModulationResult {
  Theta p;
  CVec eta;
  int iterations = 0;
  double max_defect = 0.0;
};

struct DecomposeOptions {
  double tol_mod = 1e-10;
  int max_iter = 25;
  double z_max = -1.0;       // negative: 0.25 ||phi|| / max_j ||phi_{e^{j+}}||
  double varpi_max = 0.1;    // relative to omega*
  double eta_max = 0.25;     // ||eta|| / ||phi||
};

// natural unit for z: ||phi|| / max_j ||phi_{e^{j+}}||
double z_unit(const RefinedProfile& rp);
CVec synthesize(const RefinedProfile& rp, const Theta& p);
ModulationResult decompose(const CVec& u, const RefinedProfile& rp, const Theta& guess,
                           const DecomposeOptions& opt = {});

struct TimeSeries {
  std::vector<double> t, theta, varpi, eta_local, Q0, E, S;
  std::vector<std::vector<cplx>> z;
  std::vector<MultiIndex> R_min;
  std::vector<std::vector<double>> zm;  // |z^m| per sample
  std::vector<double> lambdas;
  double q0_drift = 0.0;  // max relative
  double e_drift = 0.0;
  int steps = 0;
  int max_newton = 0;
};

TimeSeries run(const SimConfig& cfg, const RefinedProfile& rp, const DecomposeOptions& dopt = {});
// same, from explicit initial data
TimeSeries run_from(const SimConfig& cfg, const RefinedProfile& rp, const CVec& u0, const DecomposeOptions& dopt = {});
CVec initial_field(const SimConfig& cfg, const RefinedProfile& rp);

struct DecayOptions {
  double transient = 0.25;  // fraction of the horizon
  int windows = 16;
  double floor = 1e-12;
};

struct DecayMetrics {
  std::vector<std::vector<double>> envelope;  // per mode, per window
  double monotonicity_defect = 0.0;           // max relative increase between windows
  double envelope_drop = 1.0;                 // initial / last window, worst mode
  double phase_consistency = 0.0;
  double S_total = 0.0;
  double S_last_quarter_share = 0.0;
  double varpi_final_oscillation = 0.0;
  double varpi_excursion = 0.0;
  double varpi_ratio = 0.0;
};

DecayMetrics fgr_decay_report(const TimeSeries& ts, const std::vector<double>& lambdas, const DecayOptions& opt = {});

std::string time_series_csv(const TimeSeries& ts);

}  // namespace rpl
