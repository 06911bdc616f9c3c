#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sta {

// A boundary condition on a control function: the order-th time derivative at
// `time` (which must be 0 or t_f) equals `value`.
struct BoundaryCondition {
  double time = 0.0;
  int order = 0;
  double value = 0.0;
};

// Smooth scalar control function on [0, t_f], stored as piecewise polynomials
// in the dimensionless time s = t/t_f. Coefficients of segment i are ascending
// powers of u = s - breaks[i]. Immutable after construction.
class Schedule {
 public:
  Schedule() = default;

  static Schedule constant(double value, double t_f);

  // Minimal-degree polynomial satisfying endpoint conditions exactly.
  static Schedule from_conditions(const std::vector<BoundaryCondition>& conditions, double t_f);

  // Trigonometric interpolant (basis 1, sin(k pi s/2), cos(k pi s/2))
  // satisfying endpoint conditions of order <= 2, re-expressed on the
  // piecewise polynomial representation by dense Hermite sampling.
  static Schedule from_conditions_trig(const std::vector<BoundaryCondition>& conditions, double t_f);

  // C^2 piecewise-quintic interpolant of f on n_knots uniform knots. When d1
  // and d2 are not supplied they are computed by high-order finite
  // differences of f.
  static Schedule from_samples(const std::function<double(double)>& f, double t_f, int n_knots,
                               const std::function<double(double)>& d1 = {},
                               const std::function<double(double)>& d2 = {});

  bool valid() const { return t_f_ > 0.0; }
  double t_f() const { return t_f_; }

  // Value of the order-th time derivative at t in [0, t_f].
  double eval(double t, int order = 0) const;
  double operator()(double t) const { return eval(t, 0); }

  // Exact d/dt as a new schedule.
  Schedule derivative() const;
  // Exact antiderivative with F(0) = 0, continuous across segments.
  Schedule antiderivative() const;
  Schedule scaled(double factor) const;
  Schedule plus(const Schedule& other) const;
  Schedule plus_constant(double offset) const;

  // Integral of the schedule over [0, t_f], exact.
  double integral() const;

  nlohmann::json to_json() const;
  static Schedule from_json(const nlohmann::json& j);

  bool operator==(const Schedule& other) const;

 private:
  double t_f_ = 0.0;
  std::vector<double> breaks_;               // segment edges in s, breaks_.front()=0, back()=1
  std::vector<std::vector<double>> coeffs_;  // per segment, ascending powers of u = s - break

  int segment_index(double s) const;
};

// Weights w such that sum_j w_j f(t + offsets_j) approximates the order-th
// derivative of f at t, exact for polynomials of degree < offsets.size().
std::vector<double> fd_weights(const std::vector<double>& offsets, int order);

// order-th derivative of f at t on a 7-point stencil of spacing h.
double fd_derivative(const std::function<double(double)>& f, double t, int order, double h);

// Stencil offsets of spacing h around t, shifted to stay inside [0, t_f].
std::vector<double> fd_offsets(int n_points, double h, double t, double t_f);

}  // namespace sta
