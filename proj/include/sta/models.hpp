#pragma once

#include <functional>
#include <optional>

#include <Eigen/Core>

#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// Controls of a driven two-level system: detuning and the real and imaginary
// parts of the coupling, all angular frequencies on a shared domain.
struct TwoLevelControls {
  Schedule delta;
  Schedule omega_r;
  Schedule omega_i;

  double t_f() const { return delta.t_f(); }
};

// Controls of a two-level system whose coupling is given in polar form
// |Omega(t)| e^{-i alpha(t)}; omega_mod must stay nonnegative.
struct ComplexCouplingControls {
  Schedule delta;
  Schedule omega_mod;
  Schedule alpha;

  double t_f() const { return delta.t_f(); }
};

// Time-dependent Hermitian matrix H(t) on [0, t_f] with its derivative,
// either analytic or by 4th-order finite differences (step 1e-5 t_f).
class HamiltonianSchedule {
 public:
  using MatrixFn = std::function<Eigen::MatrixXcd(double)>;

  HamiltonianSchedule() = default;
  HamiltonianSchedule(int dim, double t_f, MatrixFn h, MatrixFn dh = {});

  int dim() const { return dim_; }
  double t_f() const { return t_f_; }

  // H(t), checked Hermitian to 1e-12 relative Frobenius norm.
  Eigen::MatrixXcd at(double t) const;
  Eigen::MatrixXcd d_dt(double t) const;

 private:
  int dim_ = 0;
  double t_f_ = 0.0;
  MatrixFn h_;
  MatrixFn dh_;
};

// Generalized harmonic oscillator with a translated, scaled container:
// V(q,t) = -F q + (m/2) w2 q^2 + (1/rho^2) U((q - qc)/rho) + g.
struct LewisLeachSpec {
  double mass = 1.0;
  Schedule force;
  Schedule omega_sq;
  std::function<double(double)> container;
  Schedule rho;
  Schedule qc;
  Schedule gauge;
  double omega0 = 1.0;

  double potential(double q, double t) const;
};

// Two-site model with fixed tunnel coupling J and bias U_bias - delta(t).
struct FaquadTwoLevel {
  double coupling_j = 1.0;
  double u_bias = 1.0;
  Schedule delta;
};

Eigen::Matrix2cd two_level_matrix(const TwoLevelControls& c, double t, const Units& u = {});

Eigen::Matrix2cd faquad_matrix(const FaquadTwoLevel& m, double t);

// H(t) for two-level controls with analytic time derivative.
HamiltonianSchedule two_level_hamiltonian(const TwoLevelControls& c, const Units& u = {});

HamiltonianSchedule faquad_hamiltonian(const FaquadTwoLevel& m);

struct Spectrum {
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXcd states;    // eigenvectors in matching columns
};

// Eigen-decomposition with a continuous phase convention: with prev_basis the
// overlap <n_prev|n(t)> is made real positive (discrete parallel transport),
// otherwise the largest-magnitude component of each vector is made real
// positive. Near-degenerate levels (gap below eps_gap_scale times the
// spectral range) are an error naming the level pair.
Spectrum instantaneous_spectrum(const HamiltonianSchedule& h, double t,
                                const std::optional<Eigen::MatrixXcd>& prev_basis = std::nullopt,
                                double eps_gap_scale = 1e-10);

Spectrum spectrum_of(const Eigen::MatrixXcd& matrix,
                     const std::optional<Eigen::MatrixXcd>& prev_basis = std::nullopt,
                     double eps_gap_scale = 1e-10);

// Pointwise sum of two Hamiltonians on the same domain.
HamiltonianSchedule hamiltonian_sum(const HamiltonianSchedule& a, const HamiltonianSchedule& b);

}  // namespace sta
