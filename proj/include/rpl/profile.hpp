#pragma once
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rpl/jet.hpp"
#include "rpl/linearization.hpp"
#include "rpl/resonance.hpp"

namespace rpl {

struct ProfileOptions {
  double tol_prof = 1e-8;
  double tau_res = 1e-3;  // relative to omega
  double sigma = 4.0;     // weight exponent of the Sigma norm
  double z_max = 0.1;     // validity radius for assemble/residual
};

struct ProfileCoefficient {
  MultiIndex m;
  Vec phi;  // physical, real
  double theta = 0.0;
  std::map<int, double> lambda_tilde;  // k -> lambda~_{k,m}
  double lambda_tilde_defect = 0.0;    // |lambda~ - <K~, xi_k>|
  std::string kind;                    // root, lambda0, lambdaj, generic
  double solve_residual = 0.0;         // linear system, relative
  double residual = 0.0;               // z^m coefficient of the reassembled equation, relative
};

// generator pair for m in R_min (pure-plus representative)
struct FgrSource {
  MultiIndex m;
  double r = 0.0;   // lambda(m)
  Vec G, Gbar;      // after the tangent projection
  Vec G_raw, Gbar_raw;
  double orth_defect = 0.0;
  double sigma_norm = 0.0;
};

struct RefinedProfile {
  RadialGrid grid{1, 1.0, 0.5, 2};
  Nonlinearity nl;
  double omega = 0.0;
  Vec phi, dphi, d2phi;
  std::vector<InternalMode> modes;
  ResonanceStructure rs;
  JetSpacePtr space;
  std::map<MultiIndex, ProfileCoefficient> coeffs;
  std::vector<FgrSource> sources;
  double max_residual = 0.0;
  double max_orth = 0.0;

  FieldJet phi_jet() const;
  ScalarJet theta_jet() const;
  std::vector<ScalarJet> flow_jets() const;  // l_j with l_j[e^{j+}] = lambda_j
  const FgrSource* source(const MultiIndex& m) const;
  std::string manifest_json() const;
};

// g(|phi|^2) phi as a jet; needs g^(k) up to the jet degree (<= 4)
FieldJet expand_nonlinearity(const FieldJet& phi, const Nonlinearity& nl);

// -Lap phi + g(|phi|^2) phi + theta phi - i D_z phi z~ with z~_j = -i l_j(z)
FieldJet profile_rhs(const RadialGrid& grid, const Nonlinearity& nl, const FieldJet& phi, const ScalarJet& theta,
                     const std::vector<ScalarJet>& flow);

// (K_m, K_mbar): z^m and z^mbar coefficients with the unknowns of degree ||m|| set to zero
std::pair<Vec, Vec> known_terms(const RefinedProfile& partial, const MultiIndex& m);

struct SolvedPair {
  ProfileCoefficient a, b;  // m and mbar (b.m == a.m when self-conjugate)
};

SolvedPair solve_coefficient(const MultiIndex& m, const std::pair<Vec, Vec>& K, const Operators& op,
                             const std::vector<InternalMode>& modes, const ResonanceStructure& rs,
                             const ProfileOptions& opt = {});

// d^2 phi / d omega^2 from the twice differentiated profile equation
Vec second_omega_derivative(const Operators& op, const Nonlinearity& nl);

RefinedProfile build_refined_profile(const GroundState& gs, const Nonlinearity& nl, const Operators& op,
                                     const std::vector<InternalMode>& modes, const ResonanceStructure& rs,
                                     const ProfileOptions& opt = {});

struct Assembled {
  CVec phi;
  cplx theta;
  std::vector<cplx> ztilde;
  bool outside_validity = false;
};

// base coefficient follows omega through phi + w dphi + w^2/2 d2phi, w = omega - anchor
Assembled assemble(const RefinedProfile& rp, double omega, const std::vector<cplx>& z, double z_max = 0.1);
// the assembled field and its partial derivatives (zR, zI per mode) and d/d omega
struct AssembledTangents {
  CVec phi, domega;
  std::vector<CVec> dzR, dzI;
};
AssembledTangents assemble_tangents(const RefinedProfile& rp, double omega, const std::vector<cplx>& z);

struct ResidualReport {
  CVec R;            // after the tangent correction
  CVec R1;           // R minus the R_min terms
  double norm_R = 0.0;
  double norm_R1 = 0.0;        // L2
  double sigma_norm_R1 = 0.0;  // Sigma norm
  double max_orth = 0.0;       // max_a |<R, T_a>| / (||R|| ||T_a||)
  std::vector<double> correction;  // theta_R, omega_R, (zR, zI) per mode
  double cond = 0.0;
  bool outside_validity = false;
};

ResidualReport profile_residual(const RefinedProfile& rp, double omega, const std::vector<cplx>& z,
                                const ProfileOptions& opt = {});

}  // namespace rpl
