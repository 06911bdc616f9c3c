#pragma once

#include <functional>
#include <utility>

#include <Eigen/Core>

#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// Hermitian matrix family H(lambda) over a single control parameter, with the
// parameter derivative either analytic or by finite differences (7-point
// stencil, step 1e-5 times the traversed range).
struct ParamHamiltonian {
  int dim = 0;
  std::function<Eigen::MatrixXcd(double)> h;
  std::function<Eigen::MatrixXcd(double)> dh;
};

// Two-site family with tunnel coupling J and bias U - lambda on the second
// site; lambda is the scheduled control.
ParamHamiltonian two_site_bias_family(double coupling_j, double u_bias);

// A scheduled control parameter with the constant that fixed its pace.
struct FaquadResult {
  Schedule lambda;
  double c = 0.0;         // adiabaticity constant, dimensionless
  double phi_bar = 0.0;   // time-averaged level gap over hbar
  bool regularized = false;  // slope floor engaged (uniform pacing only)
};

// Paces lambda from lambda_start to lambda_end in t_f so the transition
// probability density between the two chosen levels (ascending indices) stays
// uniform: |lambda'| = (c/hbar) gap^2 / |<i|dH/dlambda|j>|.
FaquadResult faquad_schedule(const ParamHamiltonian& model, double lambda_start,
                             double lambda_end, double t_f,
                             std::pair<int, int> levels = {0, 1}, const Units& units = {});

// Same boundary problem with |lambda'| = (c/hbar) gap^2.
FaquadResult local_adiabatic_schedule(const ParamHamiltonian& model, double lambda_start,
                                      double lambda_end, double t_f,
                                      std::pair<int, int> levels = {0, 1},
                                      const Units& units = {});

// Same boundary problem with |lambda'| = (c/hbar) gap^2 / |d gap/dlambda|;
// vanishing slope is floored at 1e-10 of the largest slope on the path and
// reported through FaquadResult::regularized.
FaquadResult uniform_adiabatic_schedule(const ParamHamiltonian& model, double lambda_start,
                                        double lambda_end, double t_f,
                                        std::pair<int, int> levels = {0, 1},
                                        const Units& units = {});

// Minimal horizon for a full interference revival under the scheduled control:
// T = 2 pi / phi_bar with phi_bar = (1/t_f) integral of gap(lambda(t)) dt / hbar.
double revival_period(const ParamHamiltonian& model, const Schedule& lambda,
                      std::pair<int, int> levels = {0, 1}, const Units& units = {});

}  // namespace sta
