#include "sta/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace sta {

namespace {

double falling_factorial(int j, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (j - i);
  return r;
}

}  // namespace

std::vector<double> fd_weights(const std::vector<double>& offsets, int m) {
  const int n = static_cast<int>(offsets.size());
  Eigen::MatrixXd V(n, n);
  for (int j = 0; j < n; ++j) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) {
      V(i, j) = p;
      p *= offsets[j];
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  double mfact = 1.0;
  for (int i = 2; i <= m; ++i) mfact *= i;
  rhs(m) = mfact;
  Eigen::VectorXd w = V.fullPivLu().solve(rhs);
  return std::vector<double>(w.data(), w.data() + n);
}

std::vector<double> fd_offsets(int n_points, double h, double t, double t_f) {
  double lo = -0.5 * (n_points - 1) * h;
  if (t + lo < 0.0) lo = -t;
  if (t + lo + (n_points - 1) * h > t_f) lo = t_f - t - (n_points - 1) * h;
  std::vector<double> offs(n_points);
  for (int j = 0; j < n_points; ++j) offs[j] = lo + j * h;
  return offs;
}

double fd_derivative(const std::function<double(double)>& f, double t, int order, double h) {
  if (order == 0) return f(t);
  const int np = 7;
  std::vector<double> offsets(np);
  for (int j = 0; j < np; ++j) offsets[j] = (j - 3) * h;
  std::vector<double> w = fd_weights(offsets, order);
  // Weights carry ~1e-16/h^order roundoff on their zero-sum condition, so the
  // common mode is removed before weighting; constant data then gives exactly 0.
  const double ref = f(t + offsets[0]);
  double acc = 0.0;
  for (int j = 0; j < np; ++j) acc += w[j] * (f(t + offsets[j]) - ref);
  return acc;
}

int Schedule::segment_index(double s) const {
  int lo = 0, hi = static_cast<int>(breaks_.size()) - 2;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (s >= breaks_[mid]) lo = mid;
    else hi = mid - 1;
  }
  return lo;
}

double Schedule::eval(double t, int order) const {
  if (!valid()) throw std::invalid_argument("schedule: not initialized");
  if (order < 0) throw std::invalid_argument("schedule: negative derivative order");
  const double slack = 1e-9 * t_f_;
  if (t < -slack || t > t_f_ + slack) throw std::invalid_argument("schedule: time outside domain [0, t_f]");
  double s = std::clamp(t / t_f_, 0.0, 1.0);
  const int seg = segment_index(s);
  const auto& c = coeffs_[seg];
  const double u = s - breaks_[seg];
  const int deg = static_cast<int>(c.size()) - 1;
  if (order > deg) return 0.0;
  // Horner on the order-th derivative of the segment polynomial.
  double acc = 0.0;
  for (int k = deg; k >= order; --k) acc = acc * u + c[k] * falling_factorial(k, order);
  return acc / std::pow(t_f_, order);
}

Schedule Schedule::constant(double value, double t_f) {
  if (t_f <= 0.0) throw std::invalid_argument("schedule: t_f must be positive");
  Schedule s;
  s.t_f_ = t_f;
  s.breaks_ = {0.0, 1.0};
  s.coeffs_ = {{value}};
  return s;
}

Schedule Schedule::from_conditions(const std::vector<BoundaryCondition>& conditions, double t_f) {
  if (t_f <= 0.0) throw std::invalid_argument("schedule: t_f must be positive");
  if (conditions.size() < 2) throw std::invalid_argument("schedule: need at least 2 conditions");
  std::vector<BoundaryCondition> conds;
  for (const auto& c : conditions) {
    if (c.order < 0 || c.order > 4) throw std::invalid_argument("schedule: condition order must be 0..4");
    bool at0 = std::abs(c.time) <= 1e-12 * t_f;
    bool at1 = std::abs(c.time - t_f) <= 1e-12 * t_f;
    if (!at0 && !at1) throw std::invalid_argument("schedule: conditions allowed at endpoints only");
    BoundaryCondition cc{at0 ? 0.0 : 1.0, c.order, c.value};
    bool dup = false;
    for (const auto& prev : conds) {
      if (prev.time == cc.time && prev.order == cc.order) {
        if (prev.value != cc.value) throw std::invalid_argument("schedule: conflicting conditions at same time and order");
        dup = true;
      }
    }
    if (!dup) conds.push_back(cc);
  }
  const int n = static_cast<int>(conds.size());
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = conds[i];
    for (int j = 0; j < n; ++j) {
      if (j < c.order) {
        A(i, j) = 0.0;
      } else if (c.time == 0.0) {
        A(i, j) = (j == c.order) ? falling_factorial(j, c.order) : 0.0;
      } else {
        A(i, j) = falling_factorial(j, c.order);
      }
    }
    b(i) = c.value * std::pow(t_f, c.order);
  }
  Eigen::VectorXd x = A.fullPivLu().solve(b);
  Schedule s;
  s.t_f_ = t_f;
  s.breaks_ = {0.0, 1.0};
  s.coeffs_ = {std::vector<double>(x.data(), x.data() + n)};
  return s;
}

Schedule Schedule::from_samples(const std::function<double(double)>& f, double t_f, int n_knots,
                                const std::function<double(double)>& d1,
                                const std::function<double(double)>& d2) {
  if (t_f <= 0.0) throw std::invalid_argument("schedule: t_f must be positive");
  if (n_knots < 2) throw std::invalid_argument("schedule: need at least 2 knots");
  const int n = n_knots;
  std::vector<double> v(n), m(n), c(n);
  const double h_fd = 1e-4 * t_f;
  for (int i = 0; i < n; ++i) {
    const double t = t_f * i / (n - 1);
    v[i] = f(t);
    const auto offs = fd_offsets(7, h_fd, t, t_f);
    for (int order = 1; order <= 2; ++order) {
      const auto& d = order == 1 ? d1 : d2;
      double& slot = order == 1 ? m[i] : c[i];
      if (d) {
        slot = d(t);
      } else {
        auto w = fd_weights(offs, order);
        double acc = 0.0;
        for (int j = 0; j < 7; ++j) acc += w[j] * (f(t + offs[j]) - v[i]);
        slot = acc;
      }
    }
  }
  Schedule s;
  s.t_f_ = t_f;
  s.breaks_.resize(n);
  for (int i = 0; i < n; ++i) s.breaks_[i] = static_cast<double>(i) / (n - 1);
  s.coeffs_.resize(n - 1);
  const double hs = 1.0 / (n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    // endpoint data in s-units
    const double p0 = v[i], p1 = v[i + 1];
    const double m0 = m[i] * t_f, m1 = m[i + 1] * t_f;
    const double c0 = c[i] * t_f * t_f, c1 = c[i + 1] * t_f * t_f;
    const double a0 = p0, a1 = m0, a2 = 0.5 * c0;
    const double A = p1 - (a0 + a1 * hs + a2 * hs * hs);
    const double B = m1 - (a1 + 2.0 * a2 * hs);
    const double C = c1 - 2.0 * a2;
    const double h2 = hs * hs, h3 = h2 * hs, h4 = h3 * hs, h5 = h4 * hs;
    const double a3 = (10.0 * A - 4.0 * B * hs + 0.5 * C * h2) / h3;
    const double a4 = (-15.0 * A + 7.0 * B * hs - C * h2) / h4;
    const double a5 = (6.0 * A - 3.0 * B * hs + 0.5 * C * h2) / h5;
    s.coeffs_[i] = {a0, a1, a2, a3, a4, a5};
  }
  return s;
}

Schedule Schedule::from_conditions_trig(const std::vector<BoundaryCondition>& conditions, double t_f) {
  if (t_f <= 0.0) throw std::invalid_argument("schedule: t_f must be positive");
  std::vector<BoundaryCondition> conds;
  for (const auto& c : conditions) {
    if (c.order < 0 || c.order > 2) throw std::invalid_argument("schedule: trig conditions support order 0..2");
    bool at0 = std::abs(c.time) <= 1e-12 * t_f;
    bool at1 = std::abs(c.time - t_f) <= 1e-12 * t_f;
    if (!at0 && !at1) throw std::invalid_argument("schedule: conditions allowed at endpoints only");
    BoundaryCondition cc{at0 ? 0.0 : 1.0, c.order, c.value};
    bool dup = false;
    for (const auto& prev : conds) {
      if (prev.time == cc.time && prev.order == cc.order) {
        if (prev.value != cc.value) throw std::invalid_argument("schedule: conflicting conditions at same time and order");
        dup = true;
      }
    }
    if (!dup) conds.push_back(cc);
  }
  const int n = static_cast<int>(conds.size());
  if (n < 2) throw std::invalid_argument("schedule: need at least 2 conditions");
  const double pi = std::acos(-1.0);
  // basis over s: 1, sin(pi s/2), cos(pi s/2), sin(pi s), cos(pi s), ...
  // Quarter-period frequencies keep endpoint rows independent; integer
  // multiples of pi make sin terms vanish at both ends simultaneously.
  auto basis = [&](int j, double s, int order) -> double {
    if (j == 0) return order == 0 ? 1.0 : 0.0;
    const int k = (j + 1) / 2;
    const double w = 0.5 * k * pi;
    const bool is_sin = (j % 2 == 1);
    const double arg = w * s;
    double f = 0.0;
    switch (order % 4) {
      case 0: f = is_sin ? std::sin(arg) : std::cos(arg); break;
      case 1: f = is_sin ? std::cos(arg) : -std::sin(arg); break;
      case 2: f = is_sin ? -std::sin(arg) : -std::cos(arg); break;
      case 3: f = is_sin ? -std::cos(arg) : std::sin(arg); break;
    }
    return f * std::pow(w, order);
  };
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) A(i, j) = basis(j, conds[i].time, conds[i].order);
    b(i) = conds[i].value * std::pow(t_f, conds[i].order);
  }
  Eigen::VectorXd x = A.fullPivLu().solve(b);
  const double scale = std::max(b.norm(), A.norm());
  if ((A * x - b).norm() > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("schedule: conditions are not representable in the trigonometric basis");
  auto evals = [&, x](double t, int order) {
    const double s = t / t_f;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += x(j) * basis(j, s, order);
    return acc / std::pow(t_f, order);
  };
  return from_samples([evals](double t) { return evals(t, 0); }, t_f, 257,
                      [evals](double t) { return evals(t, 1); },
                      [evals](double t) { return evals(t, 2); });
}

Schedule Schedule::derivative() const {
  if (!valid()) throw std::invalid_argument("schedule: not initialized");
  Schedule d;
  d.t_f_ = t_f_;
  d.breaks_ = breaks_;
  d.coeffs_.resize(coeffs_.size());
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    const auto& c = coeffs_[i];
    std::vector<double> dc;
    if (c.size() > 1) {
      dc.resize(c.size() - 1);
      for (size_t k = 1; k < c.size(); ++k) dc[k - 1] = c[k] * static_cast<double>(k) / t_f_;
    } else {
      dc = {0.0};
    }
    d.coeffs_[i] = std::move(dc);
  }
  return d;
}

Schedule Schedule::antiderivative() const {
  if (!valid()) throw std::invalid_argument("schedule: not initialized");
  Schedule a;
  a.t_f_ = t_f_;
  a.breaks_ = breaks_;
  a.coeffs_.resize(coeffs_.size());
  double running = 0.0;
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    const auto& c = coeffs_[i];
    std::vector<double> ac(c.size() + 1);
    ac[0] = running;
    for (size_t k = 0; k < c.size(); ++k) ac[k + 1] = c[k] * t_f_ / static_cast<double>(k + 1);
    const double w = breaks_[i + 1] - breaks_[i];
    double end = 0.0;
    for (int k = static_cast<int>(ac.size()) - 1; k >= 0; --k) end = end * w + ac[k];
    running = end;
    a.coeffs_[i] = std::move(ac);
  }
  return a;
}

Schedule Schedule::scaled(double factor) const {
  Schedule s = *this;
  for (auto& seg : s.coeffs_)
    for (auto& c : seg) c *= factor;
  return s;
}

Schedule Schedule::plus_constant(double offset) const {
  Schedule s = *this;
  for (auto& seg : s.coeffs_) seg[0] += offset;
  return s;
}

namespace {
// re-center polynomial coefficients from expansion point b_old to b_new
std::vector<double> taylor_shift(const std::vector<double>& c, double delta) {
  const int n = static_cast<int>(c.size());
  std::vector<double> out(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double binom = 1.0;
    double dp = 1.0;
    for (int j = k; j < n; ++j) {
      out[k] += c[j] * binom * dp;
      binom = binom * (j + 1) / static_cast<double>(j + 1 - k);
      dp *= delta;
    }
  }
  return out;
}
}  // namespace

Schedule Schedule::plus(const Schedule& other) const {
  if (!valid() || !other.valid()) throw std::invalid_argument("schedule: not initialized");
  if (std::abs(t_f_ - other.t_f_) > 1e-12 * t_f_) throw std::invalid_argument("schedule: domain mismatch in sum");
  std::vector<double> merged;
  std::merge(breaks_.begin(), breaks_.end(), other.breaks_.begin(), other.breaks_.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               merged.end());
  Schedule s;
  s.t_f_ = t_f_;
  s.breaks_ = merged;
  s.coeffs_.resize(merged.size() - 1);
  for (size_t i = 0; i + 1 < merged.size(); ++i) {
    const double b = merged[i];
    const double probe = 0.5 * (merged[i] + merged[i + 1]);
    const int ia = segment_index(probe);
    const int ib = other.segment_index(probe);
    auto ca = taylor_shift(coeffs_[ia], b - breaks_[ia]);
    auto cb = taylor_shift(other.coeffs_[ib], b - other.breaks_[ib]);
    std::vector<double> sum(std::max(ca.size(), cb.size()), 0.0);
    for (size_t k = 0; k < ca.size(); ++k) sum[k] += ca[k];
    for (size_t k = 0; k < cb.size(); ++k) sum[k] += cb[k];
    s.coeffs_[i] = std::move(sum);
  }
  return s;
}

double Schedule::integral() const { return antiderivative().eval(t_f_, 0); }

nlohmann::json Schedule::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (size_t i = 0; i + 1 < breaks_.size(); ++i) {
    segs.push_back({{"breaks", {breaks_[i], breaks_[i + 1]}}, {"coeffs", coeffs_[i]}});
  }
  return {{"t_f", t_f_}, {"segments", segs}};
}

Schedule Schedule::from_json(const nlohmann::json& j) {
  Schedule s;
  s.t_f_ = j.at("t_f").get<double>();
  if (s.t_f_ <= 0.0) throw std::invalid_argument("schedule: t_f must be positive");
  const auto& segs = j.at("segments");
  if (segs.empty()) throw std::invalid_argument("schedule: no segments");
  for (const auto& seg : segs) {
    const auto br = seg.at("breaks").get<std::vector<double>>();
    if (br.size() != 2) throw std::invalid_argument("schedule: segment breaks must be a pair");
    if (s.breaks_.empty()) {
      s.breaks_.push_back(br[0]);
    } else if (std::abs(s.breaks_.back() - br[0]) > 1e-12) {
      throw std::invalid_argument("schedule: segments not contiguous");
    }
    s.breaks_.push_back(br[1]);
    s.coeffs_.push_back(seg.at("coeffs").get<std::vector<double>>());
  }
  if (std::abs(s.breaks_.front()) > 1e-12 || std::abs(s.breaks_.back() - 1.0) > 1e-12)
    throw std::invalid_argument("schedule: segments must cover [0, 1]");
  return s;
}

bool Schedule::operator==(const Schedule& other) const {
  return t_f_ == other.t_f_ && breaks_ == other.breaks_ && coeffs_ == other.coeffs_;
}

}  // namespace sta
