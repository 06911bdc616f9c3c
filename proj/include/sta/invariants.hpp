#pragma once

#include <vector>

#include <Eigen/Core>

#include "sta/models.hpp"
#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// Bloch-sphere path (theta, alpha) of the tracked dynamical mode together
// with the phase integrand gamma; the driven state is |phi_+(t)> e^{-i gamma/2}.
struct TwoLevelAnsatz {
  Schedule theta;
  Schedule alpha;
  Schedule gamma;

  double t_f() const { return theta.t_f(); }
};

// Trap-opening design: rho solves the Ermakov equation for the returned
// omega_sq by construction; omega_sq may dip below zero on fast ramps.
struct ExpansionDesign {
  double omega0 = 0.0;
  double omega_f = 0.0;
  Schedule rho;
  Schedule omega_sq;
};

// Harmonic transport design: the particle follows qc while the trap center
// runs ahead along x0 = qc + qc''/omega0^2; force = m omega0^2 x0.
struct TransportDesign {
  double d = 0.0;
  double omega0 = 0.0;
  Schedule qc;
  Schedule x0;
  Schedule force;
};

// Opening design for the 1D condensate with the interaction ramp that keeps
// the scaling solution exact.
struct GpeExpansionDesign {
  ExpansionDesign expansion;
  Schedule coupling;
};

// Controls realizing the ansatz:
//   Omega_R = cos(alpha) sin(theta) gamma' - sin(alpha) theta'
//   Omega_I = sin(alpha) sin(theta) gamma' + cos(alpha) theta'
//   Delta   = -cos(theta) gamma' - alpha'
// sampled onto n_knots Hermite knots with analytic first derivatives. Knots
// where |sin theta| < 1e-8 keep only the theta' terms when also
// |gamma'| < 1e-8, and are an error naming the time otherwise.
TwoLevelControls two_level_from_ansatz(const TwoLevelAnsatz& a, int n_knots = 513);

// Max over t_grid of the two consistency residuals
//   |theta' - (Omega_I cos alpha - Omega_R sin alpha)|
//   |alpha' + Delta + cot(theta) (Omega_R cos alpha + Omega_I sin alpha)|;
// the second is skipped where |sin theta| < 1e-8 (pole of the cotangent).
double auxiliary_residual(const TwoLevelControls& c, const TwoLevelAnsatz& a,
                          const std::vector<double>& t_grid);

// I(t) = (hbar/2) [[cos th, sin th e^{-i al}], [sin th e^{i al}, -cos th]],
// eigenvalues +-hbar/2.
Eigen::Matrix2cd invariant_matrix(const TwoLevelAnsatz& a, double t, const Units& units = {});

// Normalized eigenvector of I(t) for eigenvalue +hbar/2 (upper) or -hbar/2.
Eigen::Vector2cd invariant_eigenstate(const TwoLevelAnsatz& a, double t, bool upper = true);

// rho: minimal polynomial with rho(0) = 1, rho(t_f) = sqrt(omega0/omega_f)
// and two flat derivatives at both ends; omega_sq(t) = omega0^2/rho^4 -
// rho''/rho by direct algebraic inversion.
ExpansionDesign design_expansion(double omega0, double omega_f, double t_f, int n_knots = 513);

// qc: quintic rest-to-rest path over distance d; x0 and force follow by
// exact polynomial algebra.
TransportDesign design_transport(double d, double t_f, double omega0, const Units& units = {});

// Phase of the tracked eigenstate with invariant eigenvalue lambda_n,
//   -(1/hbar) int_0^t [lambda_n/rho^2
//                      + m((qc' rho - qc rho')^2 - omega0^2 qc^2/rho^2)/(2 rho^2)
//                      + g] dt',
// by adaptive quadrature to 1e-10 absolute.
double lr_phase(const LewisLeachSpec& spec, double lambda_n, double t, const Units& units = {});

// Same rho and omega_sq as design_expansion plus the coupling g(t) = g0/rho.
GpeExpansionDesign gpe_scaling_expansion(double omega0, double omega_f, double t_f, double g0,
                                         int n_knots = 513);

}  // namespace sta
