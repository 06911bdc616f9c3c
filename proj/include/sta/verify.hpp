#pragma once

#include <complex>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "sta/models.hpp"
#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// State history of an N-level propagation, sampled at every step.
struct NLevelTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
};

struct DensityTrajectory {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> states;
};

// Wavefunction samples on a uniform spatial grid.
struct GridWavefunction {
  double x_lo = 0.0;
  double x_hi = 0.0;
  Eigen::VectorXcd psi;
  double mass = 1.0;
  double hbar = 1.0;

  double dx() const { return (x_hi - x_lo) / (static_cast<int>(psi.size()) - 1); }
  double x_at(int i) const { return x_lo + i * dx(); }
  // Trapezoid norm integral of |psi|^2.
  double squared_norm() const;
  void normalize();
  double mean_x() const;
  double var_x() const;
};

struct BoundCheck {
  std::string kind;
  double lhs = 0.0;     // elapsed time t_f
  double rhs = 0.0;     // computed lower bound on the time
  double margin = 0.0;  // lhs - rhs
};

// A Hermitian coupling operator A feeding -strength [A,[A,rho]] into the
// master equation.
struct Dissipator {
  Eigen::MatrixXcd op;
  double strength = 0.0;
};

// Unitary evolution by exponential midpoint steps; dt <= 0 picks t_f/4000.
// End-to-end norm drift above 1e-9 triggers one refinement, then an error.
NLevelTrajectory propagate_nlevel(const HamiltonianSchedule& h, const Eigen::VectorXcd& psi0,
                                  double dt = 0.0, const Units& u = {});

// Master-equation evolution, Strang splitting of the coherent part and the
// exact dephasing maps of each dissipator; dt <= 0 picks t_f/2000.
DensityTrajectory propagate_lindblad(const HamiltonianSchedule& h, const std::vector<Dissipator>& ds,
                                     const Eigen::MatrixXcd& rho0, double dt = 0.0,
                                     const Units& u = {});

// Split-step Fourier evolution of psi0 under potential v(x, t); dt <= 0 picks
// t_f/2000. The optional observer runs after every step.
GridWavefunction propagate_grid(const std::function<double(double, double)>& v,
                                const GridWavefunction& psi0, double t_f, double dt = 0.0,
                                const std::function<void(double, const GridWavefunction&)>& observer = {});

struct OscillatorTrajectory {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> v;
  double final_excitation = 0.0;  // energy above the final trap minimum
};

// Integrates x'' = -w2(t) x + F(t)/m with adaptive RK45 (rel tol 1e-10). The
// drive is either the equilibrium trajectory x0(t) (F = m w2 x0) or F itself.
OscillatorTrajectory simulate_forced_oscillator(const Schedule& omega_sq, const Schedule& drive,
                                                bool drive_is_equilibrium,
                                                std::pair<double, double> init, double mass = 1.0,
                                                int n_samples = 2001);

struct LangevinSpec {
  std::function<double(double, double)> grad;     // dU/dx at (x, t)
  std::function<double(double, double)> dpot_dt;  // work rate; work stays 0 when absent
  double gamma = 1.0;                             // friction rate
  double temperature = 1.0;
  double mass = 1.0;
};

struct LangevinEnsemble {
  std::vector<double> x;
  std::vector<double> v;     // empty for overdamped runs
  std::vector<double> work;  // per-trajectory time integral of dU/dt
};

using LangevinInit = std::function<std::pair<double, double>(std::mt19937_64&)>;

// Euler-Maruyama ensembles, one rng per trajectory seeded seed+index so the
// result is independent of thread count (STA_KIT_THREADS, default 1).
LangevinEnsemble simulate_langevin(const LangevinSpec& spec, const LangevinInit& init, int n_traj,
                                   unsigned long long seed, double t_f, double dt,
                                   const Units& u = {});
LangevinEnsemble simulate_overdamped(const LangevinSpec& spec,
                                     const std::function<double(std::mt19937_64&)>& init_x,
                                     int n_traj, unsigned long long seed, double t_f, double dt,
                                     const Units& u = {});

double fidelity(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi);
double fidelity(const GridWavefunction& psi, const GridWavefunction& phi);

// Populations |<n_k(t)|psi(t)>|^2 in the parallel-transported eigenbasis of
// h, one row per trajectory sample.
Eigen::MatrixXd tracked_populations(const NLevelTrajectory& traj, const HamiltonianSchedule& h);

BoundCheck aa_bound(const NLevelTrajectory& traj, const HamiltonianSchedule& h, const Units& u = {});
BoundCheck ml_bound(const NLevelTrajectory& traj, const HamiltonianSchedule& h, const Units& u = {});

double time_averaged_energy(const NLevelTrajectory& traj, const HamiltonianSchedule& h);

// Composite Simpson on uniform samples (3/8 tail when the count is even).
double simpson(const std::vector<double>& values, double dt);

// Normalized n-th harmonic-oscillator eigenstate on a uniform grid.
GridWavefunction harmonic_eigenstate(int n_level, double omega, double center, int n_points,
                                     double x_lo, double x_hi, const Units& u = {});

}  // namespace sta
