#include "sta/invariants.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sta {

namespace {

using complexd = std::complex<double>;

std::string format_time(double t) {
  std::ostringstream out;
  out << t;
  return out.str();
}

struct ControlSample {
  double wr = 0.0;
  double wi = 0.0;
  double delta = 0.0;
  double wr_dot = 0.0;
  double wi_dot = 0.0;
  double delta_dot = 0.0;
};

ControlSample controls_at(const TwoLevelAnsatz& a, double t) {
  const double th = a.theta.eval(t, 0), thd = a.theta.eval(t, 1), thdd = a.theta.eval(t, 2);
  const double ald = a.alpha.eval(t, 1), aldd = a.alpha.eval(t, 2);
  const double gd = a.gamma.eval(t, 1), gdd = a.gamma.eval(t, 2);
  const double al = a.alpha.eval(t, 0);
  const double s = std::sin(th), c = std::cos(th);
  const double sa = std::sin(al), ca = std::cos(al);

  ControlSample out;
  if (std::abs(s) < 1e-8) {
    if (std::abs(gd) >= 1e-8) {
      throw std::invalid_argument("ansatz: sin(theta) vanishes with nonzero phase rate at t=" +
                                  format_time(t));
    }
    out.wr = -sa * thd;
    out.wi = ca * thd;
    out.wr_dot = -ca * ald * thd - sa * thdd;
    out.wi_dot = -sa * ald * thd + ca * thdd;
  } else {
    out.wr = ca * s * gd - sa * thd;
    out.wi = sa * s * gd + ca * thd;
    out.wr_dot = -sa * ald * s * gd + ca * c * thd * gd + ca * s * gdd - ca * ald * thd - sa * thdd;
    out.wi_dot = ca * ald * s * gd + sa * c * thd * gd + sa * s * gdd - sa * ald * thd + ca * thdd;
  }
  out.delta = -c * gd - ald;
  out.delta_dot = s * thd * gd - c * gdd - aldd;
  return out;
}

}  // namespace

TwoLevelControls two_level_from_ansatz(const TwoLevelAnsatz& a, int n_knots) {
  const double t_f = a.theta.t_f();
  if (t_f <= 0.0) throw std::invalid_argument("ansatz: schedules are empty");
  if (std::abs(a.alpha.t_f() - t_f) > 1e-12 * t_f ||
      std::abs(a.gamma.t_f() - t_f) > 1e-12 * t_f) {
    throw std::invalid_argument("ansatz: schedules must share a domain");
  }

  TwoLevelControls c;
  c.omega_r = Schedule::from_samples([a](double t) { return controls_at(a, t).wr; }, t_f, n_knots,
                                     [a](double t) { return controls_at(a, t).wr_dot; });
  c.omega_i = Schedule::from_samples([a](double t) { return controls_at(a, t).wi; }, t_f, n_knots,
                                     [a](double t) { return controls_at(a, t).wi_dot; });
  c.delta = Schedule::from_samples([a](double t) { return controls_at(a, t).delta; }, t_f, n_knots,
                                   [a](double t) { return controls_at(a, t).delta_dot; });
  return c;
}

double auxiliary_residual(const TwoLevelControls& c, const TwoLevelAnsatz& a,
                          const std::vector<double>& t_grid) {
  double worst = 0.0;
  for (const double t : t_grid) {
    const double th = a.theta.eval(t, 0), thd = a.theta.eval(t, 1);
    const double al = a.alpha.eval(t, 0), ald = a.alpha.eval(t, 1);
    const double sa = std::sin(al), ca = std::cos(al);
    const double wr = c.omega_r(t), wi = c.omega_i(t), de = c.delta(t);

    worst = std::max(worst, std::abs(thd - (wi * ca - wr * sa)));
    const double s = std::sin(th);
    if (std::abs(s) >= 1e-8) {
      const double cot = std::cos(th) / s;
      worst = std::max(worst, std::abs(ald + de + cot * (wr * ca + wi * sa)));
    }
  }
  return worst;
}

Eigen::Matrix2cd invariant_matrix(const TwoLevelAnsatz& a, double t, const Units& units) {
  const double th = a.theta(t), al = a.alpha(t);
  const complexd off = std::sin(th) * std::polar(1.0, -al);
  Eigen::Matrix2cd m;
  m << std::cos(th), off, std::conj(off), -std::cos(th);
  return 0.5 * units.hbar * m;
}

Eigen::Vector2cd invariant_eigenstate(const TwoLevelAnsatz& a, double t, bool upper) {
  const double half_th = 0.5 * a.theta(t);
  const complexd lo = std::polar(1.0, -0.5 * a.alpha(t));
  const complexd hi = std::conj(lo);
  Eigen::Vector2cd v;
  if (upper) {
    v << std::cos(half_th) * lo, std::sin(half_th) * hi;
  } else {
    v << std::sin(half_th) * lo, -std::cos(half_th) * hi;
  }
  return v;
}

ExpansionDesign design_expansion(double omega0, double omega_f, double t_f, int n_knots) {
  if (omega0 <= 0.0 || omega_f <= 0.0) {
    throw std::invalid_argument("expansion: frequencies must be positive");
  }
  if (t_f <= 0.0) throw std::invalid_argument("expansion: duration must be positive");

  ExpansionDesign out;
  out.omega0 = omega0;
  out.omega_f = omega_f;
  const double rho_f = std::sqrt(omega0 / omega_f);
  out.rho = Schedule::from_conditions({{0.0, 0, 1.0},
                                       {0.0, 1, 0.0},
                                       {0.0, 2, 0.0},
                                       {t_f, 0, rho_f},
                                       {t_f, 1, 0.0},
                                       {t_f, 2, 0.0}},
                                      t_f);

  const Schedule rho = out.rho;
  const double w2 = omega0 * omega0;
  auto value = [rho, w2](double t) {
    const double r = rho(t);
    const double r2 = r * r;
    return w2 / (r2 * r2) - rho.eval(t, 2) / r;
  };
  auto d1 = [rho, w2](double t) {
    const double r = rho(t), rd = rho.eval(t, 1), rdd = rho.eval(t, 2);
    const double r2 = r * r;
    return -4.0 * w2 * rd / (r2 * r2 * r) - rho.eval(t, 3) / r + rdd * rd / r2;
  };
  auto d2 = [rho, w2](double t) {
    const double r = rho(t), rd = rho.eval(t, 1), rdd = rho.eval(t, 2);
    const double r2 = r * r, r3 = r2 * r;
    return 20.0 * w2 * rd * rd / (r3 * r3) - 4.0 * w2 * rdd / (r2 * r3) - rho.eval(t, 4) / r +
           2.0 * rho.eval(t, 3) * rd / r2 + rdd * rdd / r2 - 2.0 * rdd * rd * rd / r3;
  };
  out.omega_sq = Schedule::from_samples(value, t_f, n_knots, d1, d2);
  return out;
}

TransportDesign design_transport(double d, double t_f, double omega0, const Units& units) {
  if (omega0 <= 0.0) throw std::invalid_argument("transport: omega0 must be positive");
  if (t_f <= 0.0) throw std::invalid_argument("transport: duration must be positive");

  TransportDesign out;
  out.d = d;
  out.omega0 = omega0;
  out.qc = Schedule::from_conditions(
      {{0.0, 0, 0.0}, {0.0, 1, 0.0}, {0.0, 2, 0.0}, {t_f, 0, d}, {t_f, 1, 0.0}, {t_f, 2, 0.0}},
      t_f);
  out.x0 = out.qc.plus(out.qc.derivative().derivative().scaled(1.0 / (omega0 * omega0)));
  out.force = out.x0.scaled(units.mass * omega0 * omega0);
  return out;
}

double lr_phase(const LewisLeachSpec& spec, double lambda_n, double t, const Units& units) {
  if (t == 0.0) return 0.0;
  const double m = spec.mass;
  const double w2 = spec.omega0 * spec.omega0;
  auto integrand = [&](double s) {
    const double r = spec.rho(s);
    if (r <= 0.0) throw std::invalid_argument("tracked phase: rho must stay positive");
    const double r2 = r * r;
    const double qc = spec.qc(s);
    const double whirl = spec.qc.eval(s, 1) * r - qc * spec.rho.eval(s, 1);
    return lambda_n / r2 + m * (whirl * whirl - w2 * qc * qc / r2) / (2.0 * r2) + spec.gauge(s);
  };
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      integrand, 0.0, t, 15, 1e-12, &err);
  return -value / units.hbar;
}

GpeExpansionDesign gpe_scaling_expansion(double omega0, double omega_f, double t_f, double g0,
                                         int n_knots) {
  GpeExpansionDesign out;
  out.expansion = design_expansion(omega0, omega_f, t_f, n_knots);

  const Schedule rho = out.expansion.rho;
  auto value = [rho, g0](double t) { return g0 / rho(t); };
  auto d1 = [rho, g0](double t) {
    const double r = rho(t);
    return -g0 * rho.eval(t, 1) / (r * r);
  };
  auto d2 = [rho, g0](double t) {
    const double r = rho(t), rd = rho.eval(t, 1);
    return g0 * (2.0 * rd * rd / (r * r * r) - rho.eval(t, 2) / (r * r));
  };
  out.coupling = Schedule::from_samples(value, t_f, n_knots, d1, d2);
  return out;
}

}  // namespace sta
