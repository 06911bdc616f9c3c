#include "sta/cd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace sta {

namespace {

using complexd = std::complex<double>;

Eigen::MatrixXcd hermitized(const Eigen::MatrixXcd& m) { return 0.5 * (m + m.adjoint()); }

Eigen::MatrixXcd assemble_cd(const Spectrum& sp, const Eigen::MatrixXcd& dh, double hbar) {
  const int dim = static_cast<int>(sp.energies.size());
  const Eigen::MatrixXcd m = sp.states.adjoint() * dh * sp.states;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(dim, dim);
  for (int row = 0; row < dim; ++row) {
    for (int col = 0; col < dim; ++col) {
      if (row != col) w(row, col) = m(row, col) / (sp.energies(col) - sp.energies(row));
    }
  }
  return hermitized(complexd(0.0, hbar) * (sp.states * w * sp.states.adjoint()));
}

std::string format_time(double t) {
  std::ostringstream out;
  out << t;
  return out.str();
}

// Coefficients (x, y, z) with H = (hbar/2)(x sx + y sy + z sz) + c I.
struct FieldPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double c = 0.0;
};

FieldPoint field_of(const Eigen::Matrix2cd& m, double hbar) {
  FieldPoint f;
  f.c = 0.5 * std::real(m(0, 0) + m(1, 1));
  f.x = 2.0 * std::real(m(0, 1)) / hbar;
  f.y = -2.0 * std::imag(m(0, 1)) / hbar;
  f.z = std::real(m(0, 0) - m(1, 1)) / hbar;
  return f;
}

Eigen::Matrix2cd pauli_dot(const Eigen::Vector3d& v) {
  Eigen::Matrix2cd m;
  m << complexd(v.z(), 0.0), complexd(v.x(), -v.y()), complexd(v.x(), v.y()),
      complexd(-v.z(), 0.0);
  return m;
}

// Rotation exp(-i (angle/2) axis.sigma) for a unit axis.
Eigen::Matrix2cd axis_rotation(const Eigen::Vector3d& axis, double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  return c * Eigen::Matrix2cd::Identity() - complexd(0.0, s) * pauli_dot(axis);
}

// Derivative samples of y on an arbitrary strictly increasing grid, 7-point
// windows shifted inward at the ends.
std::vector<double> grid_derivative(const std::vector<double>& ts, const std::vector<double>& y) {
  const int n = static_cast<int>(ts.size());
  const int stencil = 7;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int start = std::clamp(i - stencil / 2, 0, n - stencil);
    std::vector<double> offsets(stencil);
    for (int k = 0; k < stencil; ++k) offsets[k] = ts[start + k] - ts[i];
    const std::vector<double> w = fd_weights(offsets, 1);
    double acc = 0.0;
    for (int k = 0; k < stencil; ++k) acc += w[k] * (y[start + k] - y[i]);
    out[i] = acc;
  }
  return out;
}

std::vector<Eigen::MatrixXcd> grid_matrix_derivative(const std::vector<double>& ts,
                                                     const std::vector<Eigen::MatrixXcd>& m) {
  const int n = static_cast<int>(ts.size());
  const int stencil = 7;
  std::vector<Eigen::MatrixXcd> out(n);
  for (int i = 0; i < n; ++i) {
    const int start = std::clamp(i - stencil / 2, 0, n - stencil);
    std::vector<double> offsets(stencil);
    for (int k = 0; k < stencil; ++k) offsets[k] = ts[start + k] - ts[i];
    const std::vector<double> w = fd_weights(offsets, 1);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m[i].rows(), m[i].cols());
    for (int k = 0; k < stencil; ++k) acc += w[k] * (m[start + k] - m[i]);
    out[i] = std::move(acc);
  }
  return out;
}

void unwrap_angles(std::vector<double>& angles) {
  const double two_pi = 2.0 * M_PI;
  double shift = 0.0;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    const double raw = angles[i] + shift;
    double jump = raw - angles[i - 1];
    while (jump > M_PI) {
      shift -= two_pi;
      jump -= two_pi;
    }
    while (jump < -M_PI) {
      shift += two_pi;
      jump += two_pi;
    }
    angles[i] = angles[i - 1] + jump;
  }
}

void append_boundary_warnings(const SuperadiabaticLevel& level, int j,
                              const std::vector<double>& ts, std::vector<std::string>& warnings) {
  double peak = 0.0;
  for (const auto& m : level.h_cd_lab) peak = std::max(peak, m.norm());
  if (peak <= 0.0) return;
  const std::size_t last = level.h_cd_lab.size() - 1;
  for (const std::size_t i : {std::size_t{0}, last}) {
    if (level.h_cd_lab[i].norm() > 1e-8 * peak) {
      warnings.push_back("superadiabatic: level " + std::to_string(j) +
                         " lab-frame term is nonzero at t=" + format_time(ts[i]) +
                         "; the drive lacks the boundary smoothness this level needs");
    }
  }
}

// Closed chain for a two-level field confined to a fixed plane through the
// origin: every frame change is a rotation about a fixed axis, so each level
// stays planar and the lab-frame terms inherit the exact axis structure.
SuperadiabaticResult planar_chain(const std::vector<double>& ts,
                                  const std::vector<FieldPoint>& fields,
                                  const std::vector<FieldPoint>& field_rates,
                                  const Eigen::Vector3d& u_axis, const Eigen::Vector3d& v_axis,
                                  int j_max, double hbar) {
  const int n = static_cast<int>(ts.size());
  SuperadiabaticResult result;
  result.times = ts;

  Eigen::Vector3d u = u_axis;
  Eigen::Vector3d v = v_axis;
  Eigen::Vector3d normal = u.cross(v);

  std::vector<double> theta(n);
  std::vector<double> energy(n);
  std::vector<double> rate(n);
  double peak_energy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d f(fields[i].x, fields[i].y, fields[i].z);
    const Eigen::Vector3d fd(field_rates[i].x, field_rates[i].y, field_rates[i].z);
    const double fu = f.dot(u);
    const double fv = f.dot(v);
    theta[i] = std::atan2(fv, fu);
    energy[i] = f.norm();
    rate[i] = (fu * fd.dot(v) - fv * fd.dot(u)) / (fu * fu + fv * fv);
    peak_energy = std::max(peak_energy, energy[i]);
  }
  unwrap_angles(theta);

  std::vector<Eigen::Matrix2cd> basis_change(n, Eigen::Matrix2cd::Identity());

  for (int j = 0; j <= j_max; ++j) {
    for (int i = 0; i < n; ++i) {
      if (energy[i] <= 1e-14 * peak_energy) {
        throw std::invalid_argument("superadiabatic: degenerate spectrum of level " +
                                    std::to_string(j) + " at t=" + format_time(ts[i]));
      }
    }
    const std::vector<double> theta_dot = (j == 0) ? rate : grid_derivative(ts, theta);

    SuperadiabaticLevel level;
    level.h_frame.resize(n);
    level.k_frame.resize(n);
    level.h_cd_lab.resize(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d direction = std::cos(theta[i]) * u + std::sin(theta[i]) * v;
      level.h_frame[i] = 0.5 * hbar * energy[i] * pauli_dot(direction) +
                         fields[i].c * Eigen::Matrix2cd::Identity();
      const Eigen::Matrix2cd k = 0.5 * hbar * theta_dot[i] * pauli_dot(normal);
      level.k_frame[i] = k;
      level.h_cd_lab[i] = basis_change[i] * k * basis_change[i].adjoint();
    }
    append_boundary_warnings(level, j, ts, result.warnings);
    result.levels.push_back(std::move(level));
    if (j == j_max) break;

    for (int i = 0; i < n; ++i) {
      basis_change[i] = basis_change[i] * axis_rotation(normal, theta[i] - theta[0]);
    }
    const Eigen::Vector3d u_next = std::cos(theta[0]) * u + std::sin(theta[0]) * v;
    const Eigen::Vector3d v_next = normal;
    u = u_next;
    v = v_next;
    normal = u.cross(v);
    peak_energy = 0.0;
    for (int i = 0; i < n; ++i) {
      const double next_theta = std::atan2(-theta_dot[i], energy[i]);
      energy[i] = std::hypot(energy[i], theta_dot[i]);
      theta[i] = next_theta;
      peak_energy = std::max(peak_energy, energy[i]);
    }
    unwrap_angles(theta);
  }
  return result;
}

// Frame-by-frame construction for any dimension. Tracked eigenbases define
// A_j(t) = V_j(t) V_j(0)^dagger, while K_j comes from first-order perturbation
// theory on dH_j/dt; the eigenvector route would inject the phase-tracking
// noise of V_j into a grid derivative, the spectral route stays exact.
SuperadiabaticResult generic_chain(const std::vector<double>& ts,
                                   std::vector<Eigen::MatrixXcd> h_current,
                                   std::vector<Eigen::MatrixXcd> h_dot, int j_max, double hbar) {
  const int n = static_cast<int>(ts.size());
  const auto dim = h_current.front().rows();
  SuperadiabaticResult result;
  result.times = ts;

  std::vector<Eigen::MatrixXcd> basis_change(n, Eigen::MatrixXcd::Identity(dim, dim));

  for (int j = 0; j <= j_max; ++j) {
    if (j > 0) h_dot = grid_matrix_derivative(ts, h_current);
    std::vector<Eigen::MatrixXcd> frames(n);
    std::optional<Eigen::MatrixXcd> prev;

    SuperadiabaticLevel level;
    level.h_frame = h_current;
    level.k_frame.resize(n);
    level.h_cd_lab.resize(n);
    Spectrum sp;
    for (int i = 0; i < n; ++i) {
      const bool unchanged = i > 0 && (h_current[i] - h_current[i - 1]).norm() == 0.0;
      if (!unchanged) sp = spectrum_of(h_current[i], prev);
      frames[i] = sp.states;
      prev = sp.states;
      level.k_frame[i] = assemble_cd(sp, h_dot[i], hbar);
      level.h_cd_lab[i] = basis_change[i] * level.k_frame[i] * basis_change[i].adjoint();
    }
    append_boundary_warnings(level, j, ts, result.warnings);

    if (j < j_max) {
      for (int i = 0; i < n; ++i) {
        const Eigen::MatrixXcd a = frames[i] * frames[0].adjoint();
        h_current[i] = hermitized(a.adjoint() * (h_current[i] - level.k_frame[i]) * a);
        basis_change[i] = basis_change[i] * a;
      }
    }
    result.levels.push_back(std::move(level));
  }
  return result;
}

}  // namespace

CdDecomposition cd_decompose(const HamiltonianSchedule& h, double t,
                             const std::optional<Eigen::MatrixXcd>& prev_basis,
                             const Units& units) {
  CdDecomposition out;
  out.h0 = h.at(t);
  const Spectrum sp = spectrum_of(out.h0, prev_basis);
  out.h_cd = assemble_cd(sp, h.d_dt(t), units.hbar);
  out.basis = sp.states;
  return out;
}

Eigen::MatrixXcd cd_term(const HamiltonianSchedule& h, double t, const Units& units) {
  const Spectrum sp = spectrum_of(h.at(t));
  return assemble_cd(sp, h.d_dt(t), units.hbar);
}

HamiltonianSchedule cd_hamiltonian(const HamiltonianSchedule& h, const Units& units) {
  return HamiltonianSchedule(h.dim(), h.t_f(),
                             [h, units](double t) { return cd_term(h, t, units); });
}

double cd_two_level(const TwoLevelControls& c, double t) {
  if (c.omega_i(t) != 0.0) {
    throw std::invalid_argument("cd_two_level: coupling must be real at t=" + format_time(t));
  }
  const double delta = c.delta(t);
  const double delta_dot = c.delta.eval(t, 1);
  const double omega_r = c.omega_r(t);
  const double omega_r_dot = c.omega_r.eval(t, 1);
  const double omega_sq = delta * delta + omega_r * omega_r;
  if (omega_sq == 0.0) {
    throw std::invalid_argument("cd_two_level: control amplitude vanishes at t=" +
                                format_time(t));
  }
  return (omega_r * delta_dot - omega_r_dot * delta) / omega_sq;
}

std::pair<Eigen::Matrix2cd, Eigen::Matrix2cd> cd_complex_coupling(
    const ComplexCouplingControls& c, double t, const Units& units) {
  const double delta = c.delta(t);
  const double delta_dot = c.delta.eval(t, 1);
  const double mod = c.omega_mod(t);
  const double mod_dot = c.omega_mod.eval(t, 1);
  const double alpha = c.alpha(t);
  const double alpha_dot = c.alpha.eval(t, 1);
  if (mod < 0.0) {
    throw std::invalid_argument("cd_complex_coupling: coupling modulus is negative at t=" +
                                format_time(t));
  }
  const double omega_sq = delta * delta + mod * mod;
  if (omega_sq == 0.0) {
    throw std::invalid_argument("cd_complex_coupling: control amplitude vanishes at t=" +
                                format_time(t));
  }
  const double omega_tilde = std::sqrt(omega_sq);
  const double cos_theta = -delta / omega_tilde;
  const double sin_theta = mod / omega_tilde;
  const double theta_dot = (delta_dot * mod - delta * mod_dot) / omega_sq;
  const complexd phase = std::polar(1.0, alpha);

  Eigen::Matrix2cd rotating;
  rotating << complexd(-alpha_dot, 0.0), complexd(0.0, -1.0) * phase * theta_dot,
      complexd(0.0, 1.0) * std::conj(phase) * theta_dot, complexd(alpha_dot, 0.0);
  rotating *= 0.5 * units.hbar;

  Eigen::Matrix2cd gauge;
  gauge << complexd(cos_theta, 0.0), phase * sin_theta, std::conj(phase) * sin_theta,
      complexd(-cos_theta, 0.0);
  gauge *= 0.5 * units.hbar * cos_theta * alpha_dot;

  return {rotating, gauge};
}

Eigen::MatrixXcd cd_single_state(const HamiltonianSchedule& h, int n, double t,
                                 const Units& units) {
  const int dim = h.dim();
  if (n < 0 || n >= dim) {
    throw std::invalid_argument("cd_single_state: level index " + std::to_string(n) +
                                " outside 0.." + std::to_string(dim - 1));
  }
  const Eigen::MatrixXcd matrix = h.at(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("cd_single_state: eigendecomposition failed at t=" + format_time(t));
  }
  const Eigen::VectorXd energies = solver.eigenvalues();
  const Eigen::MatrixXcd states = solver.eigenvectors();
  const double range = energies(dim - 1) - energies(0);
  const double eps_gap = 1e-10 * range;
  for (int m = 0; m < dim; ++m) {
    if (m != n && std::abs(energies(m) - energies(n)) <= eps_gap) {
      throw std::invalid_argument("cd_single_state: level " + std::to_string(n) +
                                  " degenerate with level " + std::to_string(m) + " at t=" +
                                  format_time(t));
    }
  }
  const Eigen::MatrixXcd dh = h.d_dt(t);
  const Eigen::VectorXcd level = states.col(n);
  const Eigen::VectorXcd dh_level = dh * level;
  Eigen::VectorXcd level_dot = Eigen::VectorXcd::Zero(dim);
  for (int m = 0; m < dim; ++m) {
    if (m == n) continue;
    level_dot += states.col(m) * (states.col(m).dot(dh_level) / (energies(n) - energies(m)));
  }
  return hermitized(complexd(0.0, units.hbar) *
                    (level_dot * level.adjoint() - level * level_dot.adjoint()));
}

SuperadiabaticResult superadiabatic_iterate(const HamiltonianSchedule& h, int j_max,
                                            std::vector<double> t_grid, const Units& units) {
  if (j_max < 0 || j_max > 4) {
    throw std::invalid_argument(
        "superadiabatic: iteration depth must lie in 0..4; deeper frames lose validity");
  }
  const double t_f = h.t_f();
  if (t_grid.empty()) {
    const int n = 2001;
    t_grid.resize(n);
    for (int i = 0; i < n; ++i) t_grid[i] = t_f * static_cast<double>(i) / (n - 1);
  }
  if (t_grid.size() < 7) {
    throw std::invalid_argument("superadiabatic: grid needs at least 7 points");
  }
  const double slack = 1e-9 * t_f;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) {
      throw std::invalid_argument("superadiabatic: grid must be strictly increasing");
    }
    if (t_grid[i] < -slack || t_grid[i] > t_f + slack) {
      throw std::invalid_argument("superadiabatic: grid point outside [0, t_f]");
    }
  }

  const int n = static_cast<int>(t_grid.size());
  std::vector<Eigen::MatrixXcd> samples(n);
  for (int i = 0; i < n; ++i) samples[i] = h.at(t_grid[i]);

  if (h.dim() == 2) {
    std::vector<FieldPoint> fields(n);
    std::vector<FieldPoint> field_rates(n);
    Eigen::MatrixXd directions(n, 3);
    for (int i = 0; i < n; ++i) {
      fields[i] = field_of(samples[i], units.hbar);
      field_rates[i] = field_of(h.d_dt(t_grid[i]), units.hbar);
      directions(i, 0) = fields[i].x;
      directions(i, 1) = fields[i].y;
      directions(i, 2) = fields[i].z;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(directions, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    if (sv(0) > 0.0 && sv(2) <= 1e-10 * sv(0)) {
      return planar_chain(t_grid, fields, field_rates, svd.matrixV().col(0), svd.matrixV().col(1),
                          j_max, units.hbar);
    }
  }
  std::vector<Eigen::MatrixXcd> sample_rates(n);
  for (int i = 0; i < n; ++i) sample_rates[i] = h.d_dt(t_grid[i]);
  return generic_chain(t_grid, std::move(samples), std::move(sample_rates), j_max, units.hbar);
}

HamiltonianSchedule lie_transform(const HamiltonianSchedule& h_total,
                                  const Eigen::MatrixXcd& generator, const Schedule& g,
                                  const Units& units) {
  const int dim = h_total.dim();
  if (generator.rows() != dim || generator.cols() != dim) {
    throw std::invalid_argument("lie_transform: generator dimension mismatch");
  }
  const double scale = generator.norm();
  if ((generator - generator.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("lie_transform: generator must be Hermitian");
  }
  const double t_f = h_total.t_f();
  if (std::abs(g.t_f() - t_f) > 1e-9 * t_f) {
    throw std::invalid_argument("lie_transform: schedule duration mismatch");
  }
  if (std::abs(g(0.0)) > 1e-9 || std::abs(g(t_f)) > 1e-9) {
    throw std::invalid_argument("lie_transform: g must vanish at both ends");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(generator);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("lie_transform: generator eigendecomposition failed");
  }
  const Eigen::MatrixXcd q = solver.eigenvectors();
  const Eigen::VectorXd lambda = solver.eigenvalues();
  const double hbar = units.hbar;
  auto value = [h_total, generator, g, q, lambda, hbar](double t) {
    const double g_value = g(t);
    const double g_dot = g.eval(t, 1);
    Eigen::VectorXcd phases(lambda.size());
    for (int k = 0; k < lambda.size(); ++k) {
      phases(k) = std::exp(complexd(0.0, g_value * lambda(k)));
    }
    const Eigen::MatrixXcd frame = q * phases.asDiagonal() * q.adjoint();
    const Eigen::MatrixXcd inner = h_total.at(t) - hbar * g_dot * generator;
    return hermitized(frame * inner * frame.adjoint());
  };
  return HamiltonianSchedule(dim, t_f, value);
}

Schedule local_cd_frequency(const Schedule& omega) {
  const double t_f = omega.t_f();
  const int n_knots = 513;
  auto value = [&omega](double t) {
    const double w = omega(t);
    if (w <= 0.0) {
      throw std::invalid_argument("local_cd_frequency: frequency must stay positive, t=" +
                                  format_time(t));
    }
    const double wd = omega.eval(t, 1);
    const double wdd = omega.eval(t, 2);
    return w * w - 0.75 * wd * wd / (w * w) + 0.5 * wdd / w;
  };
  return Schedule::from_samples(value, t_f, n_knots);
}

Schedule compensating_force(const Schedule& qc, double mass) {
  return qc.derivative().derivative().scaled(mass);
}

}  // namespace sta
