#include "sta/fastforward.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sta {

namespace {

std::string format_number(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void check_path(const DensityPath& d) {
  if (!d.rho) throw std::invalid_argument("density path: rho is not set");
  if (d.n_x < 8) throw std::invalid_argument("density path: grid needs at least 8 points");
  if (!(d.x_hi > d.x_lo)) throw std::invalid_argument("density path: grid span must be positive");
  if (!(d.t_f > 0.0)) throw std::invalid_argument("density path: duration must be positive");
}

std::vector<double> amplitude_row(const DensityPath& d, double t) {
  std::vector<double> out(d.n_x);
  for (int i = 0; i < d.n_x; ++i) out[i] = d.rho(d.x_at(i), t);
  return out;
}

std::vector<double> squared_row(const DensityPath& d, double t) {
  std::vector<double> out = amplitude_row(d, t);
  for (double& v : out) v *= v;
  return out;
}

// d(rho^2)/dt at every grid point, analytic when rho_dot is supplied.
std::vector<double> squared_rate_row(const DensityPath& d, double t) {
  const int n = d.n_x;
  std::vector<double> out(n);
  if (d.rho_dot) {
    for (int i = 0; i < n; ++i) {
      const double x = d.x_at(i);
      out[i] = 2.0 * d.rho(x, t) * d.rho_dot(x, t);
    }
    return out;
  }
  const double step = d.dt_time > 0.0 ? d.dt_time : d.t_f / 2000.0;
  const std::vector<double> offs = fd_offsets(3, step, t, d.t_f);
  const std::vector<double> w = fd_weights(offs, 1);
  const std::vector<double> ref = squared_row(d, t + offs[0]);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 1; j < offs.size(); ++j) {
    const std::vector<double> row = squared_row(d, t + offs[j]);
    for (int i = 0; i < n; ++i) out[i] += w[j] * (row[i] - ref[i]);
  }
  return out;
}

// First or second derivative of grid samples: 5-point central stencils
// inside, one-sided stencils (6 points for order 2) at the edges. The
// common mode is subtracted before weighting so constant data gives 0.
// Within one call the start-minus-i shift identifies the stencil, so the
// few distinct weight sets are solved once.
std::vector<double> grid_derivative(const std::vector<double>& f, double h, int order) {
  const int n = static_cast<int>(f.size());
  const int central = 5;
  const int edge = order == 2 ? 6 : 5;
  std::array<std::vector<double>, 7> cache;
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    int m = central;
    int start = i - central / 2;
    if (start < 0 || start + central > n) {
      m = edge;
      start = std::clamp(start, 0, n - edge);
    }
    std::vector<double>& w = cache[static_cast<std::size_t>(i - start)];
    if (w.empty()) {
      std::vector<double> offsets(m);
      for (int k = 0; k < m; ++k) offsets[k] = (start + k - i) * h;
      w = fd_weights(offsets, order);
    }
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += w[k] * (f[start + k] - f[i]);
    out[i] = acc;
  }
  return out;
}

// Cumulative integral from the left grid edge: trapezoid sums plus the
// h^2/12 endpoint-derivative correction, leaving O(h^4) quadrature error.
std::vector<double> cumulative_integral(const std::vector<double>& f, double h) {
  const int n = static_cast<int>(f.size());
  std::vector<double> s(n, 0.0);
  for (int i = 1; i < n; ++i) s[i] = s[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  const std::vector<double> fp = grid_derivative(f, h, 1);
  const double c = h * h / 12.0;
  for (int i = 1; i < n; ++i) s[i] -= c * (fp[i] - fp[0]);
  return s;
}

double lagrange_at(const std::vector<double>& y, const std::vector<int>& src, double xi) {
  double out = 0.0;
  for (int a : src) {
    double term = y[a];
    for (int b : src) {
      if (b != a) term *= (xi - b) / static_cast<double>(a - b);
    }
    out += term;
  }
  return out;
}

std::vector<int> gather_sources(const std::vector<char>& ok, int from, int step) {
  std::vector<int> src;
  const int n = static_cast<int>(ok.size());
  for (int i = from; i >= 0 && i < n && src.size() < 3; i += step) {
    if (ok[i]) src.push_back(i);
  }
  return src;
}

// Fills masked-out runs by quadratic continuation, blending the
// extrapolants of the flanking valid triples across interior runs.
void patch_invalid(std::vector<double>& vals, const std::vector<char>& ok) {
  const int n = static_cast<int>(vals.size());
  int i = 0;
  while (i < n) {
    if (ok[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j < n && !ok[j]) ++j;
    const std::vector<int> left = gather_sources(ok, i - 1, -1);
    const std::vector<int> right = gather_sources(ok, j, 1);
    for (int k = i; k < j; ++k) {
      if (left.empty() && right.empty()) {
        vals[k] = 0.0;
      } else if (left.empty()) {
        vals[k] = lagrange_at(vals, right, k);
      } else if (right.empty()) {
        vals[k] = lagrange_at(vals, left, k);
      } else {
        const double w = static_cast<double>(k - (i - 1)) / static_cast<double>(j - (i - 1));
        vals[k] = (1.0 - w) * lagrange_at(vals, left, k) + w * lagrange_at(vals, right, k);
      }
    }
    i = j;
  }
}

// Quotient num/den where den >= 1e-12 max(den); elsewhere the node policy
// substitutes a quadratic continuation.
std::vector<double> guarded_quotient(const std::vector<double>& num,
                                     const std::vector<double>& den) {
  const int n = static_cast<int>(num.size());
  const double peak = *std::max_element(den.begin(), den.end());
  const double floor = 1e-12 * peak;
  std::vector<double> out(n, 0.0);
  std::vector<char> ok(n, 0);
  for (int i = 0; i < n; ++i) {
    if (peak > 0.0 && den[i] >= floor) {
      ok[i] = 1;
      out[i] = num[i] / den[i];
    }
  }
  patch_invalid(out, ok);
  return out;
}

// Integral of u from the anchor: x = 0 interpolated quadratically when the
// grid straddles it, otherwise the left edge.
std::vector<double> anchored_integral(const DensityPath& d, const std::vector<double>& u) {
  std::vector<double> s = cumulative_integral(u, d.dx());
  double ref = 0.0;
  if (d.x_lo <= 0.0 && d.x_hi >= 0.0) {
    const double pos = -d.x_lo / d.dx();
    const int j0 = std::clamp(static_cast<int>(std::lround(pos)) - 1, 0, d.n_x - 3);
    ref = lagrange_at(s, {j0, j0 + 1, j0 + 2}, pos);
  }
  for (double& v : s) v -= ref;
  return s;
}

double phase_rate(const DensityPath& d, double t) {
  return d.phi0.valid() ? d.phi0.eval(t, 1) : 0.0;
}

}  // namespace

void validate_density_path(const DensityPath& d, int n_time) {
  check_path(d);
  if (n_time < 2) throw std::invalid_argument("density path: need at least 2 validation instants");
  const double h = d.dx();
  for (int k = 0; k < n_time; ++k) {
    const double t = d.t_f * k / (n_time - 1);
    const std::vector<double> row = amplitude_row(d, t);
    double norm = 0.0;
    for (int i = 0; i < d.n_x; ++i) {
      if (row[i] < 0.0) {
        throw std::invalid_argument("density path: negative amplitude at x=" +
                                    format_number(d.x_at(i)) + ", t=" + format_number(t));
      }
      const double weight = (i == 0 || i == d.n_x - 1) ? 0.5 : 1.0;
      norm += weight * row[i] * row[i] * h;
    }
    if (std::abs(norm - 1.0) > 1e-8) {
      throw std::invalid_argument("density path: squared norm is " + format_number(norm) +
                                  " at t=" + format_number(t));
    }
  }
}

std::vector<double> hydrodynamic_velocity(const DensityPath& d, double t) {
  check_path(d);
  const std::vector<double> rate = squared_rate_row(d, t);
  const std::vector<double> sq = squared_row(d, t);
  std::vector<double> flux = cumulative_integral(rate, d.dx());
  const std::vector<double> mass = cumulative_integral(sq, d.dx());
  // A normalized density carries zero net flux across the grid, so spread the
  // residual total over the mass profile; the correction keeps the quotient's
  // numerator at the local flux scale in the decaying tails.
  if (mass.back() > 0.0) {
    const double defect = flux.back() / mass.back();
    for (int i = 0; i < d.n_x; ++i) flux[i] -= defect * mass[i];
  }
  return guarded_quotient(flux, sq);
}

std::vector<double> ff_potential(const DensityPath& d, double t, const Units& units) {
  check_path(d);
  const int n = d.n_x;
  const double step = d.dt_time > 0.0 ? d.dt_time : d.t_f / 2000.0;
  const std::vector<double> offs = fd_offsets(3, step, t, d.t_f);
  const std::vector<double> w = fd_weights(offs, 1);
  const std::vector<double> ref = anchored_integral(d, hydrodynamic_velocity(d, t + offs[0]));
  std::vector<double> s_rate(n, 0.0);
  for (std::size_t j = 1; j < offs.size(); ++j) {
    const std::vector<double> s = anchored_integral(d, hydrodynamic_velocity(d, t + offs[j]));
    for (int i = 0; i < n; ++i) s_rate[i] += w[j] * (s[i] - ref[i]);
  }
  const std::vector<double> u = hydrodynamic_velocity(d, t);
  const std::vector<double> amp = amplitude_row(d, t);
  std::vector<double> sq(amp);
  for (double& v : sq) v *= v;
  std::vector<double> curvature_num = grid_derivative(amp, d.dx(), 2);
  for (int i = 0; i < n; ++i) curvature_num[i] *= amp[i];
  const std::vector<double> curvature = guarded_quotient(curvature_num, sq);
  const double m = units.mass;
  const double kin = 0.5 * units.hbar * units.hbar / m;
  const double gauge = units.hbar * phase_rate(d, t);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = m * s_rate[i] + kin * curvature[i] - 0.5 * m * u[i] * u[i] - gauge;
  }
  return out;
}

std::vector<double> ff_phase(const DensityPath& d, double t, const Units& units) {
  check_path(d);
  const std::vector<double> s = anchored_integral(d, hydrodynamic_velocity(d, t));
  const double base = d.phi0.valid() ? d.phi0(t) : 0.0;
  const double scale = units.mass / units.hbar;
  std::vector<double> out(d.n_x);
  for (int i = 0; i < d.n_x; ++i) out[i] = base - scale * s[i];
  return out;
}

std::vector<double> truncate_nodes(std::vector<double> v, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("truncation cap must be positive");
  for (double& x : v) x = std::clamp(x, -cap, cap);
  return v;
}

}  // namespace sta
