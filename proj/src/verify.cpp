#include "sta/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <unsupported/Eigen/FFT>

namespace sta {

namespace {

int even_step_count(double t_f, double dt) {
  int n = static_cast<int>(std::ceil(t_f / dt - 1e-9));
  if (n < 2) n = 2;
  if (n % 2) ++n;
  return n;
}

Eigen::MatrixXcd hermitian_exp(const Eigen::MatrixXcd& a, std::complex<double> factor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  if (es.info() != Eigen::Success) throw std::runtime_error("propagate: eigensolver failed");
  Eigen::VectorXcd phases(a.rows());
  for (int i = 0; i < a.rows(); ++i) phases(i) = std::exp(factor * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

NLevelTrajectory run_nlevel(const HamiltonianSchedule& h, const Eigen::VectorXcd& psi0, int n_steps,
                            const Units& u) {
  const double dt = h.t_f() / n_steps;
  NLevelTrajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(psi0);
  Eigen::VectorXcd psi = psi0;
  for (int k = 0; k < n_steps; ++k) {
    const double t_mid = (k + 0.5) * dt;
    psi = hermitian_exp(h.at(t_mid), std::complex<double>(0.0, -dt / u.hbar)) * psi;
    traj.times.push_back((k + 1) * dt);
    traj.states.push_back(psi);
  }
  return traj;
}

int thread_count() {
  if (const char* env = std::getenv("STA_KIT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace

NLevelTrajectory propagate_nlevel(const HamiltonianSchedule& h, const Eigen::VectorXcd& psi0,
                                  double dt, const Units& u) {
  if (psi0.size() != h.dim()) throw std::invalid_argument("propagate: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("propagate: state not normalized");
  if (dt <= 0.0) dt = h.t_f() / 4000;
  int n_steps = even_step_count(h.t_f(), dt);
  for (int attempt = 0; attempt < 2; ++attempt) {
    NLevelTrajectory traj = run_nlevel(h, psi0, n_steps, u);
    if (std::abs(traj.states.back().norm() - 1.0) < 1e-9) return traj;
    n_steps *= 4;
  }
  throw std::runtime_error("propagate: norm drift above 1e-9 persists after refinement");
}

namespace {

struct DephasingMap {
  Eigen::MatrixXcd basis;    // eigenvectors of the coupling operator
  Eigen::VectorXd levels;    // its eigenvalues
  double strength = 0.0;

  // Exact solution of drho/dt = -strength [A,[A,rho]] over a span dt.
  void apply(Eigen::MatrixXcd& rho, double dt) const {
    Eigen::MatrixXcd r = basis.adjoint() * rho * basis;
    const int n = static_cast<int>(levels.size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double gap = levels(i) - levels(j);
        r(i, j) *= std::exp(-strength * gap * gap * dt);
      }
    rho = basis * r * basis.adjoint();
  }
};

}  // namespace

DensityTrajectory propagate_lindblad(const HamiltonianSchedule& h, const std::vector<Dissipator>& ds,
                                     const Eigen::MatrixXcd& rho0, double dt, const Units& u) {
  if (rho0.rows() != h.dim() || rho0.cols() != h.dim())
    throw std::invalid_argument("propagate: density matrix dimension mismatch");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-10 || std::abs(rho0.trace().imag()) > 1e-10)
    throw std::invalid_argument("propagate: density matrix trace must be 1");
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho0);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("propagate: density matrix not positive");
  }
  if (dt <= 0.0) dt = h.t_f() / 2000;
  const int n_steps = even_step_count(h.t_f(), dt);
  const double step = h.t_f() / n_steps;

  std::vector<DephasingMap> maps;
  for (const auto& d : ds) {
    if ((d.op - d.op.adjoint()).norm() > 1e-12 * std::max(d.op.norm(), 1e-300))
      throw std::invalid_argument("propagate: dissipator operator must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d.op);
    if (es.info() != Eigen::Success) throw std::runtime_error("propagate: dissipator eigensolver failed");
    maps.push_back({es.eigenvectors(), es.eigenvalues(), d.strength});
  }
  auto dissipate = [&](Eigen::MatrixXcd& rho, double span) {
    const size_t m = maps.size();
    if (m == 0) return;
    for (size_t i = 0; i + 1 < m; ++i) maps[i].apply(rho, 0.5 * span);
    maps[m - 1].apply(rho, span);
    for (size_t i = m - 1; i-- > 0;) maps[i].apply(rho, 0.5 * span);
  };

  DensityTrajectory traj;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(rho0);
  Eigen::MatrixXcd rho = rho0;
  for (int k = 0; k < n_steps; ++k) {
    const double t0 = k * step;
    const Eigen::MatrixXcd u1 = hermitian_exp(h.at(t0 + 0.25 * step), std::complex<double>(0.0, -0.5 * step / u.hbar));
    rho = u1 * rho * u1.adjoint();
    dissipate(rho, step);
    const Eigen::MatrixXcd u2 = hermitian_exp(h.at(t0 + 0.75 * step), std::complex<double>(0.0, -0.5 * step / u.hbar));
    rho = u2 * rho * u2.adjoint();
    const double tr_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (tr_err > 1e-9) throw std::runtime_error("propagate: trace drift above 1e-9");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw std::runtime_error("propagate: density matrix lost positivity");
    traj.times.push_back(t0 + step);
    traj.states.push_back(rho);
  }
  return traj;
}

double GridWavefunction::squared_norm() const {
  const int n = static_cast<int>(psi.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * std::norm(psi(i));
  }
  return acc * dx();
}

void GridWavefunction::normalize() { psi /= std::sqrt(squared_norm()); }

double GridWavefunction::mean_x() const {
  const int n = static_cast<int>(psi.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * x_at(i) * std::norm(psi(i));
  }
  return acc * dx() / squared_norm();
}

double GridWavefunction::var_x() const {
  const double mu = mean_x();
  const int n = static_cast<int>(psi.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    const double d = x_at(i) - mu;
    acc += w * d * d * std::norm(psi(i));
  }
  return acc * dx() / squared_norm();
}

GridWavefunction propagate_grid(const std::function<double(double, double)>& v,
                                const GridWavefunction& psi0, double t_f, double dt,
                                const std::function<void(double, const GridWavefunction&)>& observer) {
  const int n = static_cast<int>(psi0.psi.size());
  if (n < 16) throw std::invalid_argument("propagate: grid too small");
  if (std::abs(psi0.squared_norm() - 1.0) > 1e-8)
    throw std::invalid_argument("propagate: grid state not normalized");
  if (dt <= 0.0) dt = t_f / 2000;
  const int n_steps = even_step_count(t_f, dt);
  const double step = t_f / n_steps;
  const double dx = psi0.dx();
  const double length = n * dx;
  const double pi = std::acos(-1.0);

  Eigen::VectorXd k_grid(n);
  for (int i = 0; i < n; ++i) {
    const int m = (i <= n / 2) ? i : i - n;
    k_grid(i) = 2.0 * pi * m / length;
  }

  GridWavefunction state = psi0;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> buf(n), spec(n);

  // Resolution diagnostics on the occupied momentum bandwidth of psi0.
  for (int i = 0; i < n; ++i) buf[i] = state.psi(i);
  fft.fwd(spec, buf);
  double weight = 0.0, k2_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::norm(spec[i]);
    weight += w;
    k2_mean += w * k_grid(i) * k_grid(i);
  }
  const double k_occ = 8.0 * std::sqrt(k2_mean / weight);
  const double k_max = pi / dx;
  if (k_occ > 0.5 * k_max)
    throw std::runtime_error("propagate: grid does not resolve the state's momentum spread");
  if (psi0.hbar * k_occ * k_occ * step / (2.0 * psi0.mass) > pi)
    throw std::runtime_error("propagate: time step does not resolve the occupied kinetic phases");

  Eigen::VectorXcd kinetic(n);
  for (int i = 0; i < n; ++i)
    kinetic(i) = std::exp(std::complex<double>(0.0, -psi0.hbar * k_grid(i) * k_grid(i) * step / (2.0 * psi0.mass)));
  for (int s = 0; s < n_steps; ++s) {
    const double t0 = s * step;
    auto half_potential = [&](double t) {
      double v_max = 0.0;
      for (int i = 0; i < n; ++i) {
        const double phase = v(state.x_at(i), t) * 0.5 * step / state.hbar;
        v_max = std::max(v_max, std::abs(phase));
        state.psi(i) *= std::exp(std::complex<double>(0.0, -phase));
      }
      if (v_max > pi)
        throw std::runtime_error("propagate: time step does not resolve the potential's phases");
    };
    half_potential(t0);
    for (int i = 0; i < n; ++i) buf[i] = state.psi(i);
    fft.fwd(spec, buf);
    for (int i = 0; i < n; ++i) spec[i] *= kinetic(i);
    fft.inv(buf, spec);
    for (int i = 0; i < n; ++i) state.psi(i) = buf[i];
    half_potential(t0 + step);
    if (observer) observer(t0 + step, state);
  }
  if (std::abs(state.squared_norm() - 1.0) > 1e-7)
    throw std::runtime_error("propagate: grid norm drift above 1e-7");
  return state;
}

OscillatorTrajectory simulate_forced_oscillator(const Schedule& omega_sq, const Schedule& drive,
                                                bool drive_is_equilibrium,
                                                std::pair<double, double> init, double mass,
                                                int n_samples) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const double t_f = omega_sq.t_f();
  auto rhs = [&](const State& s, State& dsdt, double t) {
    const double w2 = omega_sq(t);
    const double f_over_m = drive_is_equilibrium ? w2 * drive(t) : drive(t) / mass;
    dsdt[0] = s[1];
    dsdt[1] = -w2 * s[0] + f_over_m;
  };
  OscillatorTrajectory traj;
  traj.times.reserve(n_samples);
  traj.x.reserve(n_samples);
  traj.v.reserve(n_samples);
  std::vector<double> sample_times(n_samples);
  for (int i = 0; i < n_samples; ++i) sample_times[i] = t_f * i / (n_samples - 1);
  State s{init.first, init.second};
  auto stepper = odeint::make_dense_output(1e-12, 1e-10, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_times(stepper, rhs, s, sample_times.begin(), sample_times.end(), t_f / 1000,
                          [&](const State& st, double t) {
                            traj.times.push_back(t);
                            traj.x.push_back(st[0]);
                            traj.v.push_back(st[1]);
                          });

  const double w2_f = omega_sq(t_f);
  const double x_eq = drive_is_equilibrium ? drive(t_f) : drive(t_f) / (mass * w2_f);
  const double dx = traj.x.back() - x_eq;
  traj.final_excitation = 0.5 * mass * traj.v.back() * traj.v.back() + 0.5 * mass * w2_f * dx * dx;
  return traj;
}

namespace {

template <typename Body>
void parallel_over(int n_items, const Body& body) {
  const int n_threads = std::min(thread_count(), n_items);
  if (n_threads <= 1) {
    for (int i = 0; i < n_items; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n_items; i += n_threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

LangevinEnsemble simulate_langevin(const LangevinSpec& spec, const LangevinInit& init, int n_traj,
                                   unsigned long long seed, double t_f, double dt, const Units& u) {
  if (n_traj < 1) throw std::invalid_argument("langevin: need at least one trajectory");
  const int n_steps = static_cast<int>(std::ceil(t_f / dt - 1e-9));
  const double step = t_f / n_steps;
  const double noise = std::sqrt(2.0 * spec.gamma * u.kB * spec.temperature / spec.mass * step);
  LangevinEnsemble ens;
  ens.x.resize(n_traj);
  ens.v.resize(n_traj);
  ens.work.assign(n_traj, 0.0);
  parallel_over(n_traj, [&](int i) {
    std::mt19937_64 rng(seed + static_cast<unsigned long long>(i));
    std::normal_distribution<double> gauss;
    auto [x, v] = init(rng);
    double work = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      const double t = k * step;
      if (spec.dpot_dt) work += spec.dpot_dt(x, t + 0.5 * step) * step;
      const double a = -spec.grad(x, t) / spec.mass - spec.gamma * v;
      x += v * step;
      v += a * step + noise * gauss(rng);
    }
    ens.x[i] = x;
    ens.v[i] = v;
    ens.work[i] = work;
  });
  return ens;
}

LangevinEnsemble simulate_overdamped(const LangevinSpec& spec,
                                     const std::function<double(std::mt19937_64&)>& init_x,
                                     int n_traj, unsigned long long seed, double t_f, double dt,
                                     const Units& u) {
  if (n_traj < 1) throw std::invalid_argument("langevin: need at least one trajectory");
  const int n_steps = static_cast<int>(std::ceil(t_f / dt - 1e-9));
  const double step = t_f / n_steps;
  const double mobility = 1.0 / (spec.mass * spec.gamma);
  const double noise = std::sqrt(2.0 * u.kB * spec.temperature * mobility * step);
  LangevinEnsemble ens;
  ens.x.resize(n_traj);
  ens.work.assign(n_traj, 0.0);
  parallel_over(n_traj, [&](int i) {
    std::mt19937_64 rng(seed + static_cast<unsigned long long>(i));
    std::normal_distribution<double> gauss;
    double x = init_x(rng);
    double work = 0.0;
    for (int k = 0; k < n_steps; ++k) {
      const double t = k * step;
      if (spec.dpot_dt) work += spec.dpot_dt(x, t + 0.5 * step) * step;
      x += -mobility * spec.grad(x, t) * step + noise * gauss(rng);
    }
    ens.x[i] = x;
    ens.work[i] = work;
  });
  return ens;
}

double fidelity(const Eigen::VectorXcd& psi, const Eigen::VectorXcd& phi) {
  return std::norm(phi.dot(psi));
}

double fidelity(const GridWavefunction& psi, const GridWavefunction& phi) {
  if (psi.psi.size() != phi.psi.size()) throw std::invalid_argument("fidelity: grid size mismatch");
  const int n = static_cast<int>(psi.psi.size());
  std::complex<double> acc(0.0, 0.0);
  for (int i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * std::conj(phi.psi(i)) * psi.psi(i);
  }
  return std::norm(acc * psi.dx());
}

Eigen::MatrixXd tracked_populations(const NLevelTrajectory& traj, const HamiltonianSchedule& h) {
  const int n_t = static_cast<int>(traj.times.size());
  const int dim = h.dim();
  Eigen::MatrixXd pops(n_t, dim);
  std::optional<Eigen::MatrixXcd> prev;
  for (int k = 0; k < n_t; ++k) {
    Spectrum sp = instantaneous_spectrum(h, traj.times[k], prev);
    for (int n = 0; n < dim; ++n) pops(k, n) = std::norm(sp.states.col(n).dot(traj.states[k]));
    prev = sp.states;
  }
  return pops;
}

double simpson(const std::vector<double>& values, double dt) {
  const int n = static_cast<int>(values.size()) - 1;  // intervals
  if (n < 1) return 0.0;
  if (n == 1) return 0.5 * dt * (values[0] + values[1]);
  const int last = (n % 2) ? n - 3 : n;  // leave a 3/8 tail when odd
  double acc = 0.0;
  for (int i = 0; i + 2 <= last; i += 2)
    acc += dt / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
  if (n % 2)
    acc += 3.0 * dt / 8.0 *
           (values[last] + 3.0 * values[last + 1] + 3.0 * values[last + 2] + values[last + 3]);
  return acc;
}

namespace {

double trajectory_dt(const NLevelTrajectory& traj) {
  if (traj.times.size() < 2) throw std::invalid_argument("bound: trajectory too short");
  return traj.times[1] - traj.times[0];
}

}  // namespace

BoundCheck aa_bound(const NLevelTrajectory& traj, const HamiltonianSchedule& h, const Units& u) {
  const double tau = traj.times.back();
  const double dt = trajectory_dt(traj);
  const double overlap = std::min(1.0, std::abs(traj.states.front().dot(traj.states.back())));
  const double path_angle = std::acos(overlap);
  std::vector<double> spread(traj.times.size());
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const Eigen::MatrixXcd ham = h.at(traj.times[k]);
    const Eigen::VectorXcd& psi = traj.states[k];
    const double e1 = psi.dot(ham * psi).real();
    const double e2 = psi.dot(ham * ham * psi).real();
    spread[k] = std::sqrt(std::max(0.0, e2 - e1 * e1));
  }
  const double mean_spread = simpson(spread, dt) / tau;
  BoundCheck b{"AA", tau, 0.0, 0.0};
  // A state that neither moved nor spread gives 0/0; the bound degenerates.
  const bool stationary = path_angle < 1e-6 && mean_spread * tau / u.hbar < 1e-6;
  if (path_angle > 1e-12 && !stationary) {
    if (mean_spread <= 0.0) throw std::runtime_error("bound: state moved with zero energy spread");
    b.rhs = u.hbar * path_angle / mean_spread;
  }
  b.margin = b.lhs - b.rhs;
  return b;
}

BoundCheck ml_bound(const NLevelTrajectory& traj, const HamiltonianSchedule& h, const Units& u) {
  const double tau = traj.times.back();
  const double dt = trajectory_dt(traj);
  const double overlap = std::min(1.0, std::abs(traj.states.front().dot(traj.states.back())));
  const double path_angle = std::acos(overlap);
  std::vector<double> amp(traj.times.size());
  for (size_t k = 0; k < traj.times.size(); ++k)
    amp[k] = std::abs(traj.states.front().dot(h.at(traj.times[k]) * traj.states[k]));
  const double mean_amp = simpson(amp, dt) / tau;
  const double numerator = u.hbar * std::abs(std::cos(path_angle) - 1.0);
  BoundCheck b{"ML-type", tau, 0.0, 0.0};
  if (numerator < 1e-14) {
    b.rhs = 0.0;
  } else if (mean_amp < 1e-14) {
    throw std::runtime_error("bound: averaged transition amplitude vanishes, bound undefined");
  } else {
    b.rhs = numerator / mean_amp;
  }
  b.margin = b.lhs - b.rhs;
  return b;
}

double time_averaged_energy(const NLevelTrajectory& traj, const HamiltonianSchedule& h) {
  const double tau = traj.times.back();
  const double dt = trajectory_dt(traj);
  std::vector<double> energy(traj.times.size());
  for (size_t k = 0; k < traj.times.size(); ++k)
    energy[k] = traj.states[k].dot(h.at(traj.times[k]) * traj.states[k]).real();
  return simpson(energy, dt) / tau;
}

GridWavefunction harmonic_eigenstate(int n_level, double omega, double center, int n_points,
                                     double x_lo, double x_hi, const Units& u) {
  if (n_level < 0) throw std::invalid_argument("eigenstate: level must be nonnegative");
  if (omega <= 0.0) throw std::invalid_argument("eigenstate: omega must be positive");
  GridWavefunction g;
  g.x_lo = x_lo;
  g.x_hi = x_hi;
  g.mass = u.mass;
  g.hbar = u.hbar;
  g.psi.resize(n_points);
  const double a = u.mass * omega / u.hbar;  // 1/length^2
  for (int i = 0; i < n_points; ++i) {
    const double xi = std::sqrt(a) * (g.x_at(i) - center);
    double h_prev = 1.0, h_cur = 2.0 * xi;  // physicists' Hermite recurrence
    double h_n = n_level == 0 ? h_prev : h_cur;
    for (int k = 2; k <= n_level; ++k) {
      h_n = 2.0 * xi * h_cur - 2.0 * (k - 1) * h_prev;
      h_prev = h_cur;
      h_cur = h_n;
    }
    g.psi(i) = h_n * std::exp(-0.5 * xi * xi);
  }
  g.normalize();
  return g;
}

}  // namespace sta
