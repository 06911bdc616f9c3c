#include "sta/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sta {

HamiltonianSchedule::HamiltonianSchedule(int dim, double t_f, MatrixFn h, MatrixFn dh)
    : dim_(dim), t_f_(t_f), h_(std::move(h)), dh_(std::move(dh)) {
  if (dim_ < 2) throw std::invalid_argument("hamiltonian: dim must be at least 2");
  if (t_f_ <= 0.0) throw std::invalid_argument("hamiltonian: t_f must be positive");
  if (!h_) throw std::invalid_argument("hamiltonian: matrix function required");
}

Eigen::MatrixXcd HamiltonianSchedule::at(double t) const {
  if (!h_) throw std::invalid_argument("hamiltonian: not initialized");
  const double slack = 1e-9 * t_f_;
  if (t < -slack || t > t_f_ + slack) throw std::invalid_argument("hamiltonian: time outside domain [0, t_f]");
  Eigen::MatrixXcd m = h_(t);
  if (m.rows() != dim_ || m.cols() != dim_) throw std::runtime_error("hamiltonian: matrix function returned wrong shape");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300))
    throw std::runtime_error("hamiltonian: matrix is not Hermitian at t=" + std::to_string(t));
  return m;
}

Eigen::MatrixXcd HamiltonianSchedule::d_dt(double t) const {
  if (dh_) return dh_(t);
  const double h_fd = 1e-5 * t_f_;
  const auto offs = fd_offsets(5, h_fd, t, t_f_);
  const auto w = fd_weights(offs, 1);
  const Eigen::MatrixXcd ref = at(t + offs[0]);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (size_t j = 0; j < offs.size(); ++j) acc += w[j] * (at(t + offs[j]) - ref);
  return acc;
}

double LewisLeachSpec::potential(double q, double t) const {
  const double r = rho(t);
  if (r <= 0.0) throw std::invalid_argument("lewis-leach: rho must stay positive");
  double v = -force(t) * q + 0.5 * mass * omega_sq(t) * q * q + gauge(t);
  if (container) v += container((q - qc(t)) / r) / (r * r);
  return v;
}

Eigen::Matrix2cd two_level_matrix(const TwoLevelControls& c, double t, const Units& u) {
  const double d = c.delta(t), wr = c.omega_r(t), wi = c.omega_i(t);
  Eigen::Matrix2cd m;
  const std::complex<double> coupling(wr, -wi);
  m << -d, coupling, std::conj(coupling), d;
  return 0.5 * u.hbar * m;
}

Eigen::Matrix2cd faquad_matrix(const FaquadTwoLevel& m, double t) {
  if (m.coupling_j <= 0.0) throw std::invalid_argument("faquad: coupling J must be positive");
  if (m.u_bias <= 0.0) throw std::invalid_argument("faquad: bias U must be positive");
  const double off = -std::sqrt(2.0) * m.coupling_j;
  Eigen::Matrix2cd h;
  h << 0.0, off, off, m.u_bias - m.delta(t);
  return h;
}

HamiltonianSchedule two_level_hamiltonian(const TwoLevelControls& c, const Units& u) {
  return HamiltonianSchedule(
      2, c.t_f(), [c, u](double t) { return two_level_matrix(c, t, u); },
      [c, u](double t) {
        const double d = c.delta.eval(t, 1), wr = c.omega_r.eval(t, 1), wi = c.omega_i.eval(t, 1);
        Eigen::Matrix2cd m;
        const std::complex<double> coupling(wr, -wi);
        m << -d, coupling, std::conj(coupling), d;
        return Eigen::MatrixXcd(0.5 * u.hbar * m);
      });
}

HamiltonianSchedule faquad_hamiltonian(const FaquadTwoLevel& m) {
  return HamiltonianSchedule(
      2, m.delta.t_f(), [m](double t) { return faquad_matrix(m, t); },
      [m](double t) {
        Eigen::Matrix2cd dh;
        dh << 0.0, 0.0, 0.0, -m.delta.eval(t, 1);
        return Eigen::MatrixXcd(dh);
      });
}

Spectrum spectrum_of(const Eigen::MatrixXcd& matrix,
                     const std::optional<Eigen::MatrixXcd>& prev_basis, double eps_gap_scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
  Spectrum sp{es.eigenvalues(), es.eigenvectors()};
  const int n = static_cast<int>(sp.energies.size());
  const double range = sp.energies(n - 1) - sp.energies(0);
  const double eps_gap = eps_gap_scale * range;
  for (int k = 0; k + 1 < n; ++k) {
    if (sp.energies(k + 1) - sp.energies(k) <= eps_gap)
      throw std::invalid_argument("spectrum: degenerate levels " + std::to_string(k) + " and " +
                                  std::to_string(k + 1));
  }
  for (int k = 0; k < n; ++k) {
    std::complex<double> anchor(0.0, 0.0);
    if (prev_basis) {
      anchor = prev_basis->col(k).dot(sp.states.col(k));
    }
    if (std::abs(anchor) < 1e-8) {
      int imax = 0;
      sp.states.col(k).cwiseAbs().maxCoeff(&imax);
      anchor = sp.states.col(k)(imax);
    }
    sp.states.col(k) *= std::conj(anchor) / std::abs(anchor);
  }
  return sp;
}

Spectrum instantaneous_spectrum(const HamiltonianSchedule& h, double t,
                                const std::optional<Eigen::MatrixXcd>& prev_basis,
                                double eps_gap_scale) {
  return spectrum_of(h.at(t), prev_basis, eps_gap_scale);
}

HamiltonianSchedule hamiltonian_sum(const HamiltonianSchedule& a, const HamiltonianSchedule& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("hamiltonian: dimension mismatch in sum");
  if (std::abs(a.t_f() - b.t_f()) > 1e-12 * a.t_f())
    throw std::invalid_argument("hamiltonian: domain mismatch in sum");
  return HamiltonianSchedule(
      a.dim(), a.t_f(), [a, b](double t) { return Eigen::MatrixXcd(a.at(t) + b.at(t)); },
      [a, b](double t) { return Eigen::MatrixXcd(a.d_dt(t) + b.d_dt(t)); });
}

}  // namespace sta
