#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "sta/models.hpp"

using namespace sta;
using std::complex;

namespace {
const double kSqrt2 = std::sqrt(2.0);

TwoLevelControls constant_controls(double delta, double wr, double wi, double t_f) {
  return {Schedule::constant(delta, t_f), Schedule::constant(wr, t_f), Schedule::constant(wi, t_f)};
}

Eigen::MatrixXcd random_hermitian(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = complex<double>(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}
}  // namespace

TEST_CASE("two-level matrix assembles the standard form") {
  const double t_f = 1.0;
  CHECK(two_level_matrix(constant_controls(0, 0, 0, t_f), 0.5).norm() == 0.0);

  Eigen::Matrix2cd diag = two_level_matrix(constant_controls(2, 0, 0, t_f), 0.5);
  CHECK(std::abs(diag(0, 0) - complex<double>(-1, 0)) < 1e-15);
  CHECK(std::abs(diag(1, 1) - complex<double>(1, 0)) < 1e-15);
  CHECK(std::abs(diag(0, 1)) < 1e-15);

  Eigen::Matrix2cd sx = two_level_matrix(constant_controls(0, 2, 0, t_f), 0.5);
  CHECK(std::abs(sx(0, 1) - complex<double>(1, 0)) < 1e-15);
  CHECK(std::abs(sx(1, 0) - complex<double>(1, 0)) < 1e-15);
  CHECK(std::abs(sx(0, 0)) < 1e-15);

  Eigen::Matrix2cd full = two_level_matrix(constant_controls(1.2, 0.7, -0.4, t_f), 0.3, Units{2.0, 1.0, 1.0});
  CHECK(std::abs(full(0, 0) - complex<double>(-1.2, 0)) < 1e-15);
  CHECK(std::abs(full(0, 1) - complex<double>(0.7, 0.4)) < 1e-15);
  CHECK(std::abs(full(1, 0) - complex<double>(0.7, -0.4)) < 1e-15);
  CHECK((full - full.adjoint()).norm() < 1e-15);
}

TEST_CASE("two-site matrix follows the bias schedule") {
  const double t_f = 1.0;
  FaquadTwoLevel resonant{1.5, 4.0, Schedule::constant(4.0, t_f)};
  Eigen::Matrix2cd hr = faquad_matrix(resonant, 0.2);
  CHECK(std::abs(hr(1, 1)) < 1e-15);
  CHECK(std::abs(hr(0, 1) + kSqrt2 * 1.5) < 1e-15);

  FaquadTwoLevel plain{1.5, 4.0, Schedule::constant(0.0, t_f)};
  CHECK(std::abs(faquad_matrix(plain, 0.2)(1, 1) - 4.0) < 1e-15);

  FaquadTwoLevel fig{1.0, 22.3, Schedule::constant(66.7, t_f)};
  Eigen::Matrix2cd hf = faquad_matrix(fig, 0.0);
  CHECK(std::abs(hf(0, 0)) < 1e-15);
  CHECK(std::abs(hf(0, 1) + kSqrt2) < 1e-15);
  CHECK(std::abs(hf(1, 0) + kSqrt2) < 1e-15);
  CHECK(std::abs(hf(1, 1) + 44.4) < 1e-12);

  FaquadTwoLevel bad{-1.0, 4.0, Schedule::constant(0.0, t_f)};
  CHECK_THROWS_AS(faquad_matrix(bad, 0.0), std::invalid_argument);
}

TEST_CASE("spectrum orders levels and fixes phases") {
  HamiltonianSchedule diag(2, 1.0, [](double) {
    Eigen::Matrix2cd m;
    m << -1, 0, 0, 1;
    return Eigen::MatrixXcd(m);
  });
  Spectrum sp = instantaneous_spectrum(diag, 0.0);
  CHECK(sp.energies(0) == doctest::Approx(-1.0));
  CHECK(sp.energies(1) == doctest::Approx(1.0));
  CHECK(std::abs(sp.states(0, 0) - complex<double>(1, 0)) < 1e-14);
  CHECK(std::abs(sp.states(1, 1) - complex<double>(1, 0)) < 1e-14);

  HamiltonianSchedule hx = two_level_hamiltonian(constant_controls(0, 2, 0, 1.0));
  Spectrum sx = instantaneous_spectrum(hx, 0.5);
  CHECK(sx.energies(0) == doctest::Approx(-1.0));
  CHECK(sx.energies(1) == doctest::Approx(1.0));
  const double isq = 1.0 / kSqrt2;
  CHECK(std::abs(sx.states(0, 0) - isq) < 1e-12);
  CHECK(std::abs(std::abs(sx.states(1, 0)) - isq) < 1e-12);
  CHECK(std::abs(sx.states(0, 0) * sx.states(1, 1) - sx.states(1, 0) * sx.states(0, 1)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tracked eigenvectors stay continuous through a sweep") {
  const double t_f = 2.0;
  Schedule delta = Schedule::from_conditions({{0.0, 0, 0.0}, {t_f, 0, t_f}}, t_f);
  HamiltonianSchedule h = two_level_hamiltonian({delta, Schedule::constant(1.0, t_f), Schedule::constant(0.0, t_f)});
  const double dt = 1e-3;
  Spectrum prev = instantaneous_spectrum(h, 0.0);
  for (double t = dt; t <= t_f + 1e-12; t += dt) {
    Spectrum cur = instantaneous_spectrum(h, t, prev.states);
    for (int n = 0; n < 2; ++n) {
      const complex<double> overlap = prev.states.col(n).dot(cur.states.col(n));
      CHECK(overlap.real() > 0.0);
      CHECK(std::abs(overlap.imag()) < 1e-12);
    }
    prev = cur;
  }
}

TEST_CASE("spectral projectors reconstruct the matrix") {
  Eigen::MatrixXcd m = random_hermitian(5, 41u);
  HamiltonianSchedule h(5, 1.0, [m](double) { return m; });
  Spectrum sp = instantaneous_spectrum(h, 0.3);
  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(5, 5);
  for (int n = 0; n < 5; ++n)
    rebuilt += sp.energies(n) * sp.states.col(n) * sp.states.col(n).adjoint();
  CHECK((rebuilt - m).norm() < 1e-10 * m.norm());
}

TEST_CASE("parallel transport kills the imaginary part of <n|dn/dt>") {
  const double t_f = 1.0;
  Schedule delta = Schedule::from_conditions(
      {{0.0, 0, -3.0}, {t_f, 0, 3.0}, {0.0, 1, 0.0}, {t_f, 1, 0.0}, {0.0, 2, 0.0}, {t_f, 2, 0.0}}, t_f);
  TwoLevelControls c{delta, Schedule::constant(1.0, t_f), Schedule::constant(0.5, t_f)};
  HamiltonianSchedule h = two_level_hamiltonian(c);
  const double dt = 1e-4;
  Spectrum prev = instantaneous_spectrum(h, 0.4);
  Spectrum mid = instantaneous_spectrum(h, 0.4 + dt, prev.states);
  Spectrum next = instantaneous_spectrum(h, 0.4 + 2 * dt, mid.states);
  for (int n = 0; n < 2; ++n) {
    const Eigen::VectorXcd dn = (next.states.col(n) - prev.states.col(n)) / (2 * dt);
    CHECK(std::abs(mid.states.col(n).dot(dn).imag()) < 1e-6);
  }
}

TEST_CASE("degenerate spectra raise an error naming the pair") {
  HamiltonianSchedule h(3, 1.0, [](double) {
    Eigen::Matrix3cd m;
    m << 1, 0, 0, 0, 1, 0, 0, 0, 5;
    return Eigen::MatrixXcd(m);
  });
  CHECK_THROWS_WITH_AS(instantaneous_spectrum(h, 0.0), "spectrum: degenerate levels 0 and 1",
                       std::invalid_argument);
}

TEST_CASE("non-hermitian matrix functions are rejected") {
  HamiltonianSchedule h(2, 1.0, [](double) {
    Eigen::Matrix2cd m;
    m << 0, 1, 0, 0;
    return Eigen::MatrixXcd(m);
  });
  CHECK_THROWS_AS(h.at(0.5), std::runtime_error);
  CHECK_THROWS_AS(HamiltonianSchedule(1, 1.0, [](double) { return Eigen::MatrixXcd::Zero(1, 1); }),
                  std::invalid_argument);
}

TEST_CASE("finite-difference matrix derivative matches the analytic one") {
  const double t_f = 2.0;
  Schedule delta = Schedule::from_conditions(
      {{0.0, 0, -3.0}, {t_f, 0, 3.0}, {0.0, 1, 0.0}, {t_f, 1, 0.0}, {0.0, 2, 0.0}, {t_f, 2, 0.0}}, t_f);
  TwoLevelControls c{delta, Schedule::constant(1.0, t_f), Schedule::constant(0.0, t_f)};
  HamiltonianSchedule analytic = two_level_hamiltonian(c);
  HamiltonianSchedule sampled(2, t_f, [c](double t) { return Eigen::MatrixXcd(two_level_matrix(c, t)); });
  for (double t : {0.0, 0.3, 1.0, 1.7, 2.0}) {
    CHECK((analytic.d_dt(t) - sampled.d_dt(t)).norm() < 1e-9);
    CHECK((analytic.at(t) - sampled.at(t)).norm() == 0.0);
  }
}

TEST_CASE("potential assembly matches the scalar formula term by term") {
  const double t_f = 1.0;
  LewisLeachSpec spec;
  spec.mass = 1.5;
  spec.force = Schedule::constant(2.0, t_f);
  spec.omega_sq = Schedule::constant(9.0, t_f);
  spec.container = [](double s) { return s * s * s * s; };
  spec.rho = Schedule::constant(2.0, t_f);
  spec.qc = Schedule::constant(0.5, t_f);
  spec.gauge = Schedule::constant(3.0, t_f);
  spec.omega0 = 3.0;
  for (double q : {-1.0, 0.0, 0.4, 2.0}) {
    const double sigma = (q - 0.5) / 2.0;
    const double expect = -2.0 * q + 0.5 * 1.5 * 9.0 * q * q + 0.25 * sigma * sigma * sigma * sigma + 3.0;
    CHECK(spec.potential(q, 0.3) == doctest::Approx(expect).epsilon(1e-14));
  }
  LewisLeachSpec bad = spec;
  bad.rho = Schedule::constant(-1.0, t_f);
  CHECK_THROWS_AS(bad.potential(0.0, 0.3), std::invalid_argument);
}
