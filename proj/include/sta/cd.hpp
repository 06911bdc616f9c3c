#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sta/models.hpp"
#include "sta/schedule.hpp"
#include "sta/units.hpp"

namespace sta {

// Snapshot of a counterdiabatic split at one time: the bare Hamiltonian, the
// auxiliary term, and the eigenbasis it is purely off-diagonal in.
struct CdDecomposition {
  Eigen::MatrixXcd h0;
  Eigen::MatrixXcd h_cd;
  Eigen::MatrixXcd basis;
};

CdDecomposition cd_decompose(const HamiltonianSchedule& h, double t,
                             const std::optional<Eigen::MatrixXcd>& prev_basis = std::nullopt,
                             const Units& units = {});

// Auxiliary term i hbar sum_{m!=n} |m><m|dH/dt|n><n| / (E_n - E_m), Hermitian
// and zero-diagonal in the instantaneous eigenbasis.
Eigen::MatrixXcd cd_term(const HamiltonianSchedule& h, double t, const Units& units = {});

// The full auxiliary term as a Hamiltonian on the same domain as h.
HamiltonianSchedule cd_hamiltonian(const HamiltonianSchedule& h, const Units& units = {});

// Auxiliary coupling amplitude for a real-coupled two-level system; the full
// matrix is (hbar/2) Omega_a sigma_y.
double cd_two_level(const TwoLevelControls& c, double t);

// Auxiliary pair (rotating part, phase-gauge part) for a two-level system
// with coupling |Omega| e^{-i alpha}; their sum is the counterdiabatic term.
std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> cd_complex_coupling(
    const ComplexCouplingControls& c, double t, const Units& units = {});

// Term i hbar [dP_n/dt, P_n] that uncouples level n while leaving all blocks
// between other levels untouched.
Eigen::MatrixXcd cd_single_state(const HamiltonianSchedule& h, int n, double t,
                                 const Units& units = {});

// One level of the iterated adiabatic-frame construction, sampled on a grid:
// the frame Hamiltonian H_j, the coupling K_j it generates, and the lab-frame
// auxiliary term B_j K_j B_j^dagger.
struct SuperadiabaticLevel {
  std::vector<Eigen::MatrixXcd> h_frame;
  std::vector<Eigen::MatrixXcd> k_frame;
  std::vector<Eigen::MatrixXcd> h_cd_lab;
};

struct SuperadiabaticResult {
  std::vector<double> times;
  std::vector<SuperadiabaticLevel> levels;  // indices 0..j_max
  std::vector<std::string> warnings;
};

// Iterates the adiabatic-frame construction j_max times (at most 4). An empty
// t_grid means 2001 uniform points on [0, t_f]. Levels whose lab-frame term
// stays finite at either boundary are reported in warnings, not rejected.
SuperadiabaticResult superadiabatic_iterate(const HamiltonianSchedule& h, int j_max,
                                            std::vector<double> t_grid = {},
                                            const Units& units = {});

// Frame change H' = e^{i g G} (H - hbar dg/dt G) e^{-i g G} by exact matrix
// exponentials; g must vanish at both ends so the frames coincide there.
HamiltonianSchedule lie_transform(const HamiltonianSchedule& h_total,
                                  const Eigen::MatrixXcd& generator, const Schedule& g,
                                  const Units& units = {});

// Squared effective frequency w^2 - 3 wdot^2/(4 w^2) + wddot/(2 w) of the
// local auxiliary-free oscillator protocol; transient negative values are
// returned as-is.
Schedule local_cd_frequency(const Schedule& omega);

// F(t) = m d^2 qc / dt^2.
Schedule compensating_force(const Schedule& qc, double mass);

}  // namespace sta
