#pragma once

#include <functional>
#include <vector>

#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// Prescribed density evolution on a uniform spatial grid: a nonnegative
// amplitude rho(x, t) carrying unit L2 norm at every instant, plus the
// reference phase at x = 0. rho_dot may supply the exact time derivative of
// the amplitude; otherwise second-order differences with step dt_time
// (0 picks t_f/2000) stand in. An empty phi0 means a vanishing reference
// phase.
struct DensityPath {
  double x_lo = 0.0;
  double x_hi = 0.0;
  int n_x = 0;
  double t_f = 0.0;
  std::function<double(double, double)> rho;
  std::function<double(double, double)> rho_dot;
  Schedule phi0;
  double dt_time = 0.0;

  double dx() const { return (x_hi - x_lo) / (n_x - 1); }
  double x_at(int i) const { return x_lo + i * dx(); }
};

// Checks the path invariants on n_time uniform instants: amplitudes stay
// nonnegative and the trapezoid norm of rho^2 stays within 1e-8 of one.
// Throws std::invalid_argument naming the first violation.
void validate_density_path(const DensityPath& d, int n_time = 33);

// Velocity field u with rho^2 u = d/dt of the cumulative rho^2 integral, so
// the continuity equation d(rho^2)/dt = d(rho^2 u)/dx holds. Where
// rho^2 < 1e-12 max(rho^2) the quotient is replaced by quadratic
// continuation from the valid neighbors.
std::vector<double> hydrodynamic_velocity(const DensityPath& d, double t);

// Local potential driving the density path,
//   V = m d/dt S + (hbar^2/2m) rho''/rho - m u^2/2 - hbar dphi0/dt,
// where S(x) integrates u from the anchor (x = 0, or the left edge when 0
// lies outside the grid) and the node policy applies to u and rho''/rho.
std::vector<double> ff_potential(const DensityPath& d, double t, const Units& units = {});

// Compatible phase phi(x) = phi0(t) - (m/hbar) S(x) with the same anchor.
std::vector<double> ff_phase(const DensityPath& d, double t, const Units& units = {});

// Clamps potential samples to [-cap, +cap]; cap must be positive.
std::vector<double> truncate_nodes(std::vector<double> v, double cap);

}  // namespace sta
