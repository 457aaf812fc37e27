#pragma once
#include <optional>

#include "rpl/nonlinearity.hpp"
#include "rpl/radial_grid.hpp"

namespace rpl {

struct GroundState {
  double omega = 0.0;
  Vec phi;    // physical samples
  Vec dphi;   // d phi / d omega
  double residual = 0.0;  // relative residual of the profile equation
  double mass = 0.0;      // ||phi||^2
  double dmass = 0.0;     // 2 <phi, dphi>: exact derivative of the discrete mass
  double dphi_residual = 0.0;  // ||L+ dphi + phi|| / ||phi||
  int newton_iterations = 0;
};

struct GroundStateOptions {
  double tol = 1e-10;
  int max_newton = 60;
};

// L+ = -Lap + omega + g(phi^2) + 2 g'(phi^2) phi^2 in symmetric coordinates
Band<double> lplus_sym(const RadialGrid& grid, const Nonlinearity& nl, double omega, const Vec& phi,
                       Parity parity = Parity::Even);
Band<double> lminus_sym(const RadialGrid& grid, const Nonlinearity& nl, double omega, const Vec& phi,
                        Parity parity = Parity::Even);

// Shooting estimate of phi(0); bisection between undershoot and overshoot.
double shoot_amplitude(const Nonlinearity& nl, double omega, int dimension, double rmax);

GroundState solve_ground_state(const Nonlinearity& nl, double omega, const RadialGrid& grid,
                               const std::optional<Vec>& init = std::nullopt,
                               const GroundStateOptions& opt = {});

struct VkEntry {
  double omega;
  double mass;
  double slope;        // centered difference over the omega grid
  double slope_exact;  // 2 <phi, d phi/d omega>
  bool pass;
};

std::vector<VkEntry> vk_check(const Nonlinearity& nl, const std::vector<double>& omegas, const RadialGrid& grid,
                              double tau_vk = 1e-8);
// status from an arbitrary mass family (test doubles, cached sweeps)
std::vector<VkEntry> vk_from_masses(const std::vector<double>& omegas, const std::vector<double>& masses,
                                    double tau_vk = 1e-8);

// <r phi, phi'> + (d/2) ||phi||^2, relative to ||phi||^2
double virial_defect(const RadialGrid& grid, const Vec& phi);

}  // namespace rpl
