#include "sta/faquad.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sta/models.hpp"

namespace sta {

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void check_request(const ParamHamiltonian& model, double lambda_start, double lambda_end,
                   double t_f, std::pair<int, int> levels) {
  if (model.dim < 2) throw std::invalid_argument("faquad: model dim must be at least 2");
  if (!model.h) throw std::invalid_argument("faquad: model matrix function required");
  if (t_f <= 0.0) throw std::invalid_argument("faquad: t_f must be positive");
  if (lambda_start == lambda_end)
    throw std::invalid_argument("faquad: lambda_start and lambda_end must differ");
  if (levels.first < 0 || levels.second >= model.dim || levels.first >= levels.second)
    throw std::invalid_argument("faquad: level pair must be ascending indices below dim");
}

Eigen::MatrixXcd family_at(const ParamHamiltonian& model, double lambda) {
  Eigen::MatrixXcd m = model.h(lambda);
  if (m.rows() != model.dim || m.cols() != model.dim)
    throw std::runtime_error("faquad: matrix function returned wrong shape");
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(m.norm(), 1e-300))
    throw std::runtime_error("faquad: matrix family is not Hermitian at lambda=" +
                             format_number(lambda));
  return m;
}

// Parameter derivative of the family: analytic when provided, else a 7-point
// stencil of spacing h kept inside [lo, hi].
Eigen::MatrixXcd family_slope(const ParamHamiltonian& model, double lambda, double h, double lo,
                              double hi) {
  if (model.dh) return model.dh(lambda);
  const auto offs = fd_offsets(7, h, lambda - lo, hi - lo);
  const auto w = fd_weights(offs, 1);
  const Eigen::MatrixXcd ref = family_at(model, lambda + offs[3]);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(model.dim, model.dim);
  for (int j = 0; j < 7; ++j) acc += w[j] * (family_at(model, lambda + offs[j]) - ref);
  return acc;
}

struct LevelProbe {
  double gap = 0.0;      // E_j - E_i > 0
  double element = 0.0;  // |<i| dH/dlambda |j>|
  double slope = 0.0;    // d gap / dlambda (Hellmann-Feynman)
};

LevelProbe probe_levels(const ParamHamiltonian& model, double lambda, std::pair<int, int> levels,
                        double fd_step, double lo, double hi) {
  const Eigen::MatrixXcd m = family_at(model, lambda);
  const Spectrum sp = spectrum_of(m, std::nullopt, 1e-14);
  LevelProbe out;
  out.gap = sp.energies(levels.second) - sp.energies(levels.first);
  const double scale = m.norm();
  if (out.gap <= 1e-10 * scale)
    throw std::invalid_argument("faquad: gap collapse at lambda=" + format_number(lambda));
  const Eigen::MatrixXcd dm = family_slope(model, lambda, fd_step, lo, hi);
  const Eigen::VectorXcd vi = sp.states.col(levels.first);
  const Eigen::VectorXcd vj = sp.states.col(levels.second);
  out.element = std::abs(std::complex<double>(vi.dot(dm * vj)));
  if (out.element < 1e-12 * dm.norm()) out.element = 0.0;
  out.slope = (vj.dot(dm * vj) - vi.dot(dm * vi)).real();
  return out;
}

enum class Pacing { transition_weighted, gap_only, gap_slope };

// Builds lambda(t) for pacing density r(lambda) >= 0: the traversal puts
// equal shares of integral r dlambda into equal shares of t, which realizes
// |lambda'| = (c/hbar) / r with c fixed by the boundary value at t_f.
FaquadResult paced_schedule(const ParamHamiltonian& model, double lambda_start, double lambda_end,
                            double t_f, std::pair<int, int> levels, const Units& units,
                            Pacing pacing) {
  check_request(model, lambda_start, lambda_end, t_f, levels);
  const double span = lambda_end - lambda_start;
  const double width = std::abs(span);
  const double lo = std::min(lambda_start, lambda_end);
  const double hi = std::max(lambda_start, lambda_end);
  const double fd_step = 1e-5 * width;

  const auto probe = [&](double lambda) { return probe_levels(model, lambda, levels, fd_step, lo, hi); };

  // Slope floor for the gap-slope pacing: 1e-10 of the largest slope seen on
  // a coarse pass, but never below the eigensolver noise scale of a slope,
  // gap/width at machine-level, so an identically flat gap floors everywhere.
  double slope_floor = 0.0;
  if (pacing == Pacing::gap_slope) {
    double max_slope = 0.0;
    double max_gap = 0.0;
    for (int k = 0; k <= 64; ++k) {
      const LevelProbe p = probe(lambda_start + span * k / 64.0);
      max_slope = std::max(max_slope, std::abs(p.slope));
      max_gap = std::max(max_gap, p.gap);
    }
    slope_floor = std::max(1e-10 * max_slope, 1e-12 * max_gap / width);
  }

  bool regularized = false;
  const auto density = [&](double lambda) -> double {
    const LevelProbe p = probe(lambda);
    switch (pacing) {
      case Pacing::transition_weighted:
        return p.element / (p.gap * p.gap);
      case Pacing::gap_only:
        return 1.0 / (p.gap * p.gap);
      case Pacing::gap_slope: {
        double s = std::abs(p.slope);
        if (s < slope_floor) {
          regularized = true;
          s = slope_floor;
        }
        return s / (p.gap * p.gap);
      }
    }
    return 0.0;
  };

  using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto lambda_of = [&](double xi) { return lambda_start + span * xi; };
  const auto density_xi = [&](double xi) { return density(lambda_of(xi)) * width; };

  // Cumulative pacing integral on a fixed grid. One non-adaptive 15-point
  // rule per panel is exact to roundoff for smooth densities; panels whose
  // error estimate reveals genuine structure (the gap-slope pacing has a
  // corner wherever the slope changes sign) are re-integrated adaptively.
  const int n_panels = 4096;
  std::vector<double> piece(n_panels);
  std::vector<char> deep(n_panels, 0);
  for (int p = 0; p < n_panels; ++p) {
    const double a = static_cast<double>(p) / n_panels;
    const double b = static_cast<double>(p + 1) / n_panels;
    double err_unit = 0.0;
    piece[p] = quad::integrate(density_xi, a, b, 0, 1e-11, &err_unit);
    if (err_unit * 0.5 * (b - a) > 1e-8 * piece[p]) {
      deep[p] = 1;
      piece[p] = quad::integrate(density_xi, a, b, 12, 1e-11);
    }
  }
  std::vector<double> edge_q(n_panels + 1, 0.0);
  for (int p = 0; p < n_panels; ++p) edge_q[p + 1] = edge_q[p] + piece[p];
  const double total = edge_q.back();
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("faquad: pacing density does not integrate on the path");

  const int n_knots = 1025;
  std::vector<double> knot_lambda(n_knots), knot_d1(n_knots), knot_d2(n_knots);
  const double rate = total / t_f;  // c / hbar
  const double sign = span > 0.0 ? 1.0 : -1.0;
  for (int k = 0; k < n_knots; ++k) {
    double xi = 0.0;
    if (k == 0) {
      xi = 0.0;
    } else if (k == n_knots - 1) {
      xi = 1.0;
    } else {
      const double target = total * k / (n_knots - 1);
      const int p = static_cast<int>(std::upper_bound(edge_q.begin(), edge_q.end(), target) -
                                     edge_q.begin()) -
                    1;
      const int panel = std::clamp(p, 0, n_panels - 1);
      double a = static_cast<double>(panel) / n_panels;
      double b = static_cast<double>(panel + 1) / n_panels;
      const double qa = edge_q[panel];
      const double qb = edge_q[panel + 1];
      xi = a + (b - a) * std::clamp((target - qa) / std::max(qb - qa, 1e-300), 0.0, 1.0);
      double bracket_lo = a, bracket_hi = b;
      for (int it = 0; it < 60; ++it) {
        const double q_here = qa + (deep[panel]
                                        ? quad::integrate(density_xi, a, xi, 6, 1e-11)
                                        : quad::integrate(density_xi, a, xi, 0, 1e-11));
        const double err = q_here - target;
        if (std::abs(err) <= 1e-13 * total) break;
        if (err > 0.0) {
          bracket_hi = xi;
        } else {
          bracket_lo = xi;
        }
        const double d = density(lambda_of(xi)) * width;
        double next = xi - err / std::max(d, 1e-300);
        if (!(next > bracket_lo && next < bracket_hi)) next = 0.5 * (bracket_lo + bracket_hi);
        xi = next;
      }
    }
    const double lam = k == n_knots - 1 ? lambda_end : (k == 0 ? lambda_start : lambda_of(xi));
    const double d_here = density(lam);
    if (!(d_here > 1e-10 * total / width) || !std::isfinite(d_here))
      throw std::invalid_argument("faquad: coupling matrix element vanishes at lambda=" +
                                  format_number(lam));
    knot_lambda[k] = lam;
    knot_d1[k] = sign * rate / d_here;
    const auto offs = fd_offsets(7, fd_step, lam - lo, hi - lo);
    const auto w = fd_weights(offs, 1);
    double dprime = 0.0;
    for (int j = 0; j < 7; ++j) dprime += w[j] * (density(lam + offs[j]) - d_here);
    knot_d2[k] = -rate * rate * dprime / (d_here * d_here * d_here);
  }

  const auto knot_index = [t_f, n_knots](double t) {
    return std::clamp(static_cast<int>(std::lround(t * (n_knots - 1) / t_f)), 0, n_knots - 1);
  };
  FaquadResult out;
  out.lambda = Schedule::from_samples(
      [&](double t) { return knot_lambda[knot_index(t)]; }, t_f, n_knots,
      [&](double t) { return knot_d1[knot_index(t)]; },
      [&](double t) { return knot_d2[knot_index(t)]; });
  out.c = units.hbar * rate;
  out.regularized = regularized;

  const auto gap_at = [&](double lambda) {
    const Spectrum sp = spectrum_of(family_at(model, lambda), std::nullopt, 1e-14);
    return sp.energies(levels.second) - sp.energies(levels.first);
  };
  const double mean_gap =
      quad::integrate([&](double t) { return gap_at(out.lambda(t)); }, 0.0, t_f, 12, 1e-12);
  out.phi_bar = mean_gap / (t_f * units.hbar);

  for (int k = 0; k + 1 < 4096; ++k) {
    const double a = out.lambda(t_f * k / 4095.0);
    const double b = out.lambda(t_f * (k + 1) / 4095.0);
    if (sign * (b - a) <= 0.0)
      throw std::runtime_error("faquad: paced schedule lost monotonicity near t=" +
                               format_number(t_f * k / 4095.0));
  }
  return out;
}

}  // namespace

ParamHamiltonian two_site_bias_family(double coupling_j, double u_bias) {
  if (coupling_j <= 0.0) throw std::invalid_argument("faquad: coupling J must be positive");
  if (u_bias <= 0.0) throw std::invalid_argument("faquad: bias U must be positive");
  ParamHamiltonian f;
  f.dim = 2;
  const double j = coupling_j;
  const double u = u_bias;
  f.h = [j, u](double lambda) {
    Eigen::MatrixXcd m(2, 2);
    m << 0.0, -std::sqrt(2.0) * j, -std::sqrt(2.0) * j, u - lambda;
    return m;
  };
  f.dh = [](double) {
    Eigen::MatrixXcd m(2, 2);
    m << 0.0, 0.0, 0.0, -1.0;
    return m;
  };
  return f;
}

FaquadResult faquad_schedule(const ParamHamiltonian& model, double lambda_start,
                             double lambda_end, double t_f, std::pair<int, int> levels,
                             const Units& units) {
  return paced_schedule(model, lambda_start, lambda_end, t_f, levels, units,
                        Pacing::transition_weighted);
}

FaquadResult local_adiabatic_schedule(const ParamHamiltonian& model, double lambda_start,
                                      double lambda_end, double t_f, std::pair<int, int> levels,
                                      const Units& units) {
  return paced_schedule(model, lambda_start, lambda_end, t_f, levels, units, Pacing::gap_only);
}

FaquadResult uniform_adiabatic_schedule(const ParamHamiltonian& model, double lambda_start,
                                        double lambda_end, double t_f,
                                        std::pair<int, int> levels, const Units& units) {
  return paced_schedule(model, lambda_start, lambda_end, t_f, levels, units, Pacing::gap_slope);
}

double revival_period(const ParamHamiltonian& model, const Schedule& lambda,
                      std::pair<int, int> levels, const Units& units) {
  if (model.dim < 2) throw std::invalid_argument("faquad: model dim must be at least 2");
  if (!model.h) throw std::invalid_argument("faquad: model matrix function required");
  if (!lambda.valid()) throw std::invalid_argument("faquad: schedule required");
  if (levels.first < 0 || levels.second >= model.dim || levels.first >= levels.second)
    throw std::invalid_argument("faquad: level pair must be ascending indices below dim");
  const double t_f = lambda.t_f();
  const double mean_gap =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          [&](double t) {
            const Spectrum sp = spectrum_of(family_at(model, lambda(t)), std::nullopt, 1e-14);
            return sp.energies(levels.second) - sp.energies(levels.first);
          },
          0.0, t_f, 12, 1e-12) /
      t_f;
  if (!(mean_gap > 0.0)) throw std::invalid_argument("faquad: gap collapse along the schedule");
  return 2.0 * M_PI * units.hbar / mean_gap;
}

}  // namespace sta
