#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "sta/models.hpp"
#include "sta/verify.hpp"

using namespace sta;
using std::complex;

namespace {
const double kPi = std::acos(-1.0);

TwoLevelControls constant_controls(double delta, double wr, double wi, double t_f) {
  return {Schedule::constant(delta, t_f), Schedule::constant(wr, t_f), Schedule::constant(wi, t_f)};
}

Eigen::VectorXcd basis_state(int dim, int which) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(which) = 1.0;
  return v;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size() - 1);
}

Schedule quintic_ramp(double a, double b, double t_f) {
  return Schedule::from_conditions(
      {{0.0, 0, a}, {t_f, 0, b}, {0.0, 1, 0.0}, {t_f, 1, 0.0}, {0.0, 2, 0.0}, {t_f, 2, 0.0}}, t_f);
}
}  // namespace

TEST_CASE("free and diagonal evolution produce pure phases") {
  HamiltonianSchedule zero(2, 1.0, [](double) { return Eigen::MatrixXcd::Zero(2, 2); });
  Eigen::VectorXcd psi0(2);
  psi0 << complex<double>(0.6, 0.0), complex<double>(0.0, 0.8);
  auto traj = propagate_nlevel(zero, psi0, 1.0 / 64);
  CHECK((traj.states.back() - psi0).norm() < 1e-12);

  HamiltonianSchedule diag(2, 2.0, [](double) {
    Eigen::Matrix2cd m;
    m << 1.5, 0, 0, -0.5;
    return Eigen::MatrixXcd(m);
  });
  Units u{2.0, 1.0, 1.0};
  auto dtraj = propagate_nlevel(diag, psi0, 0.0, u);
  const double t_f = 2.0;
  const complex<double> i_unit(0.0, 1.0);
  Eigen::VectorXcd expect(2);
  expect << psi0(0) * std::exp(-i_unit * 1.5 * t_f / u.hbar), psi0(1) * std::exp(-i_unit * -0.5 * t_f / u.hbar);
  CHECK((dtraj.states.back() - expect).norm() < 1e-10);
}

TEST_CASE("constant coupling follows the Rabi formula") {
  const double omega = 2.0;
  const double t_f = kPi / omega;
  HamiltonianSchedule h = two_level_hamiltonian(constant_controls(0.0, omega, 0.0, t_f));
  auto traj = propagate_nlevel(h, basis_state(2, 0));
  CHECK(std::norm(traj.states.back()(1)) == doctest::Approx(1.0).epsilon(1e-10));
  for (size_t k = 0; k < traj.times.size(); k += 400) {
    const double p2 = std::norm(traj.states[k](1));
    CHECK(p2 == doctest::Approx(std::pow(std::sin(0.5 * omega * traj.times[k]), 2)).epsilon(1e-9));
  }
  for (const auto& s : traj.states) CHECK(std::abs(s.norm() - 1.0) < 1e-12);

  Eigen::VectorXcd unnormalized = 2.0 * basis_state(2, 0);
  CHECK_THROWS_AS(propagate_nlevel(h, unnormalized), std::invalid_argument);
}

TEST_CASE("half pulse splits the population evenly") {
  const double omega = 2.0;
  const double t_f = 0.5 * kPi / omega;
  HamiltonianSchedule h = two_level_hamiltonian(constant_controls(0.0, omega, 0.0, t_f));
  auto traj = propagate_nlevel(h, basis_state(2, 0));
  CHECK(fidelity(traj.states.back(), basis_state(2, 1)) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fidelity(basis_state(2, 0), basis_state(2, 0)) == doctest::Approx(1.0));
  CHECK(fidelity(basis_state(2, 0), basis_state(2, 1)) == doctest::Approx(0.0));
}

TEST_CASE("dephasing decays coherences at the exact rate") {
  const double t_f = 2.0;
  HamiltonianSchedule zero(2, t_f, [](double) { return Eigen::MatrixXcd::Zero(2, 2); });
  Eigen::Matrix2cd sz;
  sz << 1, 0, 0, -1;
  const double c = 0.3;
  Eigen::Matrix2cd rho0;
  rho0 << 0.5, 0.5, 0.5, 0.5;
  auto traj = propagate_lindblad(zero, {{sz, c}}, rho0, t_f / 500);
  const double expect = 0.5 * std::exp(-4.0 * c * t_f);
  CHECK(std::abs(traj.states.back()(0, 1).real() - expect) < 1e-12);
  CHECK(std::abs(traj.states.back()(0, 0).real() - 0.5) < 1e-12);

  Eigen::Matrix2cd up = Eigen::Matrix2cd::Zero();
  up(0, 0) = 1.0;
  auto stay = propagate_lindblad(zero, {{sz, c}}, up, t_f / 500);
  CHECK((stay.states.back() - up).norm() < 1e-12);
}

TEST_CASE("zero dissipators reduce the master equation to unitary motion") {
  const double t_f = 2.0;
  TwoLevelControls c{quintic_ramp(-5.0, 5.0, t_f), Schedule::constant(1.0, t_f),
                     Schedule::constant(0.0, t_f)};
  HamiltonianSchedule h = two_level_hamiltonian(c);
  auto pure = propagate_nlevel(h, basis_state(2, 0), t_f / 8000);
  auto mixed = propagate_lindblad(h, {}, basis_state(2, 0) * basis_state(2, 0).adjoint(), t_f / 8000);
  const Eigen::MatrixXcd outer = pure.states.back() * pure.states.back().adjoint();
  CHECK((mixed.states.back() - outer).norm() < 1e-6);
}

TEST_CASE("noisy pulses lose population") {
  const double omega = 2.0;
  const double t_f = kPi / omega;
  HamiltonianSchedule h = two_level_hamiltonian(constant_controls(0.0, omega, 0.0, t_f));
  Eigen::Matrix2cd sx;
  sx << 0, 1, 1, 0;
  const Eigen::Matrix2cd h2r = 0.5 * omega * sx;
  const double lambda = 0.1;
  auto traj = propagate_lindblad(h, {{h2r, 0.5 * lambda * lambda}},
                                 basis_state(2, 0) * basis_state(2, 0).adjoint(), t_f / 2000);
  const double p2 = traj.states.back()(1, 1).real();
  CHECK(p2 < 1.0 - 1e-6);
  CHECK(p2 > 0.9);
  for (const auto& rho : traj.states) {
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-9);
  }
}

TEST_CASE("free packets spread at the textbook rate") {
  const int n = 1024;
  GridWavefunction g;
  g.x_lo = -12.0;
  g.x_hi = 12.0;
  g.psi.resize(n);
  const double sigma0 = 1.0;
  for (int i = 0; i < n; ++i) g.psi(i) = std::exp(-g.x_at(i) * g.x_at(i) / (4.0 * sigma0 * sigma0));
  g.normalize();
  const double t_f = 2.0;
  GridWavefunction out = propagate_grid([](double, double) { return 0.0; }, g, t_f);
  const double expect = sigma0 * sigma0 * (1.0 + std::pow(t_f / (2.0 * sigma0 * sigma0), 2));
  CHECK(std::abs(out.var_x() - expect) < 1e-4 * expect);
  CHECK(std::abs(out.squared_norm() - 1.0) < 1e-7);
}

TEST_CASE("the harmonic ground state is stationary on the grid") {
  const double omega = 2.0;
  GridWavefunction g = harmonic_eigenstate(0, omega, 0.0, 1024, -10.0, 10.0);
  const double t_f = 3.0;
  GridWavefunction out =
      propagate_grid([omega](double x, double) { return 0.5 * omega * omega * x * x; }, g, t_f);
  CHECK(fidelity(out, g) > 1.0 - 1e-8);

  GridWavefunction bad = g;
  bad.psi *= 2.0;
  CHECK_THROWS_AS(propagate_grid([](double, double) { return 0.0; }, bad, 1.0), std::invalid_argument);
}

TEST_CASE("first excited state picks up only a phase") {
  const double omega = 1.5;
  GridWavefunction g = harmonic_eigenstate(1, omega, 0.0, 1024, -12.0, 12.0);
  GridWavefunction out =
      propagate_grid([omega](double x, double) { return 0.5 * omega * omega * x * x; }, g, 2.0);
  CHECK(fidelity(out, g) > 1.0 - 1e-6);
  CHECK(std::abs(g.mean_x()) < 1e-10);
}

TEST_CASE("a static oscillator stays put") {
  Schedule w2 = Schedule::constant(4.0, 1.0);
  Schedule x0 = Schedule::constant(0.7, 1.0);
  auto traj = simulate_forced_oscillator(w2, x0, true, {0.7, 0.0});
  CHECK(std::abs(traj.x.back() - 0.7) < 1e-10);
  CHECK(std::abs(traj.v.back()) < 1e-10);
  CHECK(traj.final_excitation < 1e-12);
}

TEST_CASE("resonant forcing grows linearly in amplitude") {
  const double w = 3.0, f0 = 0.5, t_f = 12.0;
  Schedule w2 = Schedule::constant(w * w, t_f);
  Schedule force = Schedule::from_samples([&](double t) { return f0 * std::cos(w * t); }, t_f, 513,
                                          [&](double t) { return -f0 * w * std::sin(w * t); },
                                          [&](double t) { return -f0 * w * w * std::cos(w * t); });
  auto traj = simulate_forced_oscillator(w2, force, false, {0.0, 0.0});
  for (size_t k = 200; k < traj.times.size(); k += 450) {
    const double t = traj.times[k];
    const double expect = f0 / (2.0 * w) * t * std::sin(w * t);
    CHECK(std::abs(traj.x[k] - expect) < 1e-6 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("compensated trap transport leaves no classical excitation") {
  const double w0 = 2.0 * kPi, d = 1.0;
  for (double t_f : {2.0, 1.3}) {
    Schedule w2 = Schedule::constant(w0 * w0, t_f);
    Schedule path = quintic_ramp(0.0, d, t_f);
    Schedule trap = path.plus(path.derivative().derivative().scaled(1.0 / (w0 * w0)));
    auto traj = simulate_forced_oscillator(w2, trap, true, {0.0, 0.0});
    CHECK(traj.final_excitation < 1e-10 * w0 * w0 * d * d);
  }
}

TEST_CASE("thermal ensembles reach equipartition") {
  LangevinSpec spec;
  const double w2 = 9.0, temp = 1.5;
  spec.grad = [&](double x, double) { return w2 * x; };
  spec.gamma = 2.0;
  spec.temperature = temp;
  spec.mass = 1.0;
  const int n_traj = 3000;
  auto ens = simulate_langevin(
      spec, [](std::mt19937_64&) { return std::pair<double, double>(0.0, 0.0); }, n_traj, 7u, 15.0,
      1e-3);
  const double vx = variance(ens.x);
  const double vv = variance(ens.v);
  const double expect_x = temp / w2;
  const double expect_v = temp;
  const double se_x = expect_x * std::sqrt(2.0 / (n_traj - 1));
  const double se_v = expect_v * std::sqrt(2.0 / (n_traj - 1));
  CHECK(std::abs(vx - expect_x) < 3.0 * se_x);
  CHECK(std::abs(vv - expect_v) < 3.0 * se_v);
  CHECK(std::abs(mean(ens.x)) < 3.0 * std::sqrt(expect_x / n_traj));

  auto again = simulate_langevin(
      spec, [](std::mt19937_64&) { return std::pair<double, double>(0.0, 0.0); }, 16, 7u, 15.0, 1e-3);
  for (int i = 0; i < 16; ++i) CHECK(again.x[i] == ens.x[i]);
}

TEST_CASE("zero temperature gives deterministic damped motion") {
  LangevinSpec spec;
  const double w = 3.0, gamma = 1.0;
  spec.grad = [&](double x, double) { return w * w * x; };
  spec.gamma = gamma;
  spec.temperature = 0.0;
  spec.mass = 1.0;
  const double t_f = 3.0;
  auto ens = simulate_langevin(
      spec, [](std::mt19937_64&) { return std::pair<double, double>(1.0, 0.0); }, 3, 99u, t_f, 1e-5);
  const double wd = std::sqrt(w * w - 0.25 * gamma * gamma);
  const double expect =
      std::exp(-0.5 * gamma * t_f) * (std::cos(wd * t_f) + 0.5 * gamma / wd * std::sin(wd * t_f));
  for (double x : ens.x) CHECK(std::abs(x - expect) < 5e-4);
  CHECK(ens.x[0] == ens.x[1]);
  CHECK(ens.work[0] == 0.0);
}

TEST_CASE("overdamped and underdamped integrators agree at high friction") {
  const double w2 = 100.0, gamma = 40.0, temp = 2.0, t_f = 1.2;
  LangevinSpec spec;
  spec.grad = [&](double x, double) { return w2 * x; };
  spec.gamma = gamma;
  spec.temperature = temp;
  spec.mass = 1.0;
  const int n_traj = 3000;
  auto under = simulate_langevin(
      spec, [](std::mt19937_64&) { return std::pair<double, double>(0.0, 0.0); }, n_traj, 11u, t_f,
      2e-5);
  auto over = simulate_overdamped(spec, [](std::mt19937_64&) { return 0.0; }, n_traj, 12u, t_f, 1e-4);
  const double expect = temp / w2;
  const double se = expect * std::sqrt(2.0 / (n_traj - 1));
  CHECK(std::abs(variance(under.x) - expect) < 3.0 * se);
  CHECK(std::abs(variance(over.x) - expect) < 3.0 * se);
  CHECK(std::abs(variance(under.x) - variance(over.x)) < 3.0 * std::sqrt(2.0) * se);
}

TEST_CASE("work integrals follow the trap stiffening") {
  const double t_f = 4.0;
  Schedule w2 = quintic_ramp(1.0, 4.0, t_f);
  LangevinSpec spec;
  spec.grad = [&](double x, double t) { return w2(t) * x; };
  spec.dpot_dt = [&](double x, double t) { return 0.5 * w2.eval(t, 1) * x * x; };
  spec.gamma = 8.0;
  spec.temperature = 1.0;
  spec.mass = 1.0;
  std::mt19937_64 seeder(3u);
  auto init = [&](std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return std::pair<double, double>(g(rng), g(rng));
  };
  auto ens = simulate_langevin(spec, init, 2000, 21u, t_f, 5e-4);
  const double w_mean = mean(ens.work);
  const double df = 0.5 * std::log(4.0 / 1.0);
  CHECK(w_mean > df);
  std::vector<double> jarz(ens.work.size());
  for (size_t i = 0; i < ens.work.size(); ++i) jarz[i] = std::exp(-ens.work[i]);
  const double se = std::sqrt(variance(jarz) / static_cast<double>(jarz.size()));
  CHECK(std::abs(mean(jarz) - std::exp(-df)) < 3.0 * se + 0.01);
}

TEST_CASE("speed limit bounds are saturated by the flat pulse") {
  const double omega = 2.0;
  const double t_f = kPi / omega;
  HamiltonianSchedule h = two_level_hamiltonian(constant_controls(0.0, omega, 0.0, t_f));
  auto traj = propagate_nlevel(h, basis_state(2, 0));
  BoundCheck aa = aa_bound(traj, h);
  CHECK(aa.kind == "AA");
  CHECK(aa.lhs == doctest::Approx(t_f));
  CHECK(std::abs(aa.margin) < 1e-8 * t_f);
  BoundCheck ml = ml_bound(traj, h);
  CHECK(ml.margin >= -1e-8 * t_f);
  CHECK(std::abs(ml.margin) < 1e-6 * t_f);
}

TEST_CASE("eigenstates satisfy the bounds trivially") {
  HamiltonianSchedule diag(2, 1.0, [](double) {
    Eigen::Matrix2cd m;
    m << -1, 0, 0, 3;
    return Eigen::MatrixXcd(m);
  });
  auto traj = propagate_nlevel(diag, basis_state(2, 0), 1.0 / 128);
  BoundCheck aa = aa_bound(traj, diag);
  CHECK(aa.rhs == 0.0);
  CHECK(aa.margin == doctest::Approx(1.0));
  BoundCheck ml = ml_bound(traj, diag);
  CHECK(ml.rhs == 0.0);
  CHECK(time_averaged_energy(traj, diag) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("a detuned sweep respects both bounds") {
  const double t_f = 1.5;
  TwoLevelControls c{quintic_ramp(-4.0, 4.0, t_f), Schedule::constant(2.0, t_f),
                     Schedule::constant(0.0, t_f)};
  HamiltonianSchedule h = two_level_hamiltonian(c);
  auto traj = propagate_nlevel(h, basis_state(2, 0));
  CHECK(aa_bound(traj, h).margin >= -1e-8 * t_f);
  CHECK(ml_bound(traj, h).margin >= -1e-8 * t_f);
}

TEST_CASE("populations in the tracked frame stay put for diagonal motion") {
  HamiltonianSchedule diag(2, 1.0, [](double t) {
    Eigen::Matrix2cd m;
    m << -1 - t, 0, 0, 1 + t;
    return Eigen::MatrixXcd(m);
  });
  Eigen::VectorXcd psi0(2);
  psi0 << std::sqrt(complex<double>(0.3, 0.0)), std::sqrt(complex<double>(0.7, 0.0));
  auto traj = propagate_nlevel(diag, psi0, 1.0 / 256);
  Eigen::MatrixXd pops = tracked_populations(traj, diag);
  for (int k = 0; k < pops.rows(); ++k) {
    CHECK(pops(k, 0) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(pops(k, 1) == doctest::Approx(0.7).epsilon(1e-10));
  }
}

TEST_CASE("simpson handles smooth integrands to high order") {
  const int n = 1000;
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = std::sin(2.0 * i / n);
  const double exact = 1.0 - std::cos(2.0);
  CHECK(std::abs(simpson(vals, 2.0 / n) - exact) < 1e-11);
  std::vector<double> odd(vals.begin(), vals.end() - 1);
  const double exact_odd = 1.0 - std::cos(2.0 * (n - 1.0) / n);
  CHECK(std::abs(simpson(odd, 2.0 / n) - exact_odd) < 1e-11);
}
