#include "bobylev/radial_grid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bobylev/errors.hpp"

namespace bobylev {

namespace {

// Derivative at x[j] of the Lagrange polynomial through (x[i], y[i]).
double lagrange_derivative(std::span<const double> x, std::span<const double> y, std::size_t j) {
  const std::size_t n = x.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double li;
    if (i == j) {
      li = 0.0;
      for (std::size_t m = 0; m < n; ++m)
        if (m != j) li += 1.0 / (x[j] - x[m]);
    } else {
      li = 1.0 / (x[i] - x[j]);
      for (std::size_t m = 0; m < n; ++m)
        if (m != i && m != j) li *= (x[j] - x[m]) / (x[i] - x[m]);
    }
    d += li * y[i];
  }
  return d;
}

// Fourth-order node slopes of y over abscissae x, limited on monotone
// stretches: where the four secants around a node share a sign the slope is
// clipped to [0, 3 min secant]. Nodes near extrema keep their high-order slope.
std::vector<double> limited_slopes(std::span<const double> xs, std::span<const double> y) {
  const std::size_t n = xs.size();
  std::vector<double> slope(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i < 2 ? 0 : std::min(i - 2, n - 5);
    slope[i] = lagrange_derivative(xs.subspan(lo, 5), y.subspan(lo, 5), i - lo);
  }
  std::vector<double> sec(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) sec[i] = (y[i + 1] - y[i]) / (xs[i + 1] - xs[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(i + 2, n - 1);  // secants lo .. hi-1
    bool monotone = true;
    const double sign = i + 1 < n ? sec[i] : sec[i - 1];
    for (std::size_t j = lo; j < hi; ++j)
      if (!(sec[j] * sign > 0.0)) monotone = false;
    if (sign == 0.0) {
      if ((i == 0 || sec[i - 1] == 0.0) && (i + 1 == n || sec[i] == 0.0)) slope[i] = 0.0;
      continue;
    }
    if (!monotone) continue;
    double lim = std::numeric_limits<double>::infinity();
    if (i > 0) lim = std::min(lim, 3.0 * std::abs(sec[i - 1]));
    if (i + 1 < n) lim = std::min(lim, 3.0 * std::abs(sec[i]));
    if (slope[i] * sign < 0.0) slope[i] = 0.0;
    if (std::abs(slope[i]) > lim) slope[i] = std::copysign(lim, sign);
  }
  return slope;
}

}  // namespace

std::shared_ptr<const RadialGrid> RadialGrid::make(const GridSpec& spec) {
  if (spec.intervals < 8) throw ConfigError("radial grid: need at least 8 intervals");
  if (!(spec.r_lin > 0.0 && spec.r_max > spec.r_lin))
    throw ConfigError("radial grid: need 0 < r_lin < r_max");
  const int M = spec.intervals;
  const double L = std::log(spec.r_max / spec.r_lin);
  // Choose the linear count n so that r_lin/n matches the first log step
  // r_lin (e^{L/(M-n)} - 1) as closely as possible.
  int best_n = 1;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int n = 1; n < M; ++n) {
    const double h_lin = spec.r_lin / n;
    const double h_log = spec.r_lin * std::expm1(L / (M - n));
    const double gap = std::abs(std::log(h_lin / h_log));
    if (gap < best_gap) {
      best_gap = gap;
      best_n = n;
    }
  }
  std::vector<double> r(M + 1);
  for (int i = 0; i <= best_n; ++i) r[i] = spec.r_lin * i / best_n;
  for (int i = best_n + 1; i <= M; ++i)
    r[i] = spec.r_lin * std::exp(L * static_cast<double>(i - best_n) / (M - best_n));
  r[M] = spec.r_max;
  auto g = std::make_shared<RadialGrid>();
  g->r_ = std::move(r);
  g->spec_ = spec;
  return g;
}

std::shared_ptr<const RadialGrid> RadialGrid::from_radii(std::vector<double> radii) {
  if (radii.size() < 6 || radii.front() != 0.0)
    throw ConfigError("radial grid: need >= 6 radii starting at 0");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigError("radial grid: radii must increase strictly");
  auto g = std::make_shared<RadialGrid>();
  g->spec_ = {static_cast<int>(radii.size()) - 1, radii.back(), radii.back()};
  g->r_ = std::move(radii);
  return g;
}

void RadialGrid::locate(double r, std::size_t& k, double& t) const {
  const double rmax = r_.back();
  if (!(r >= 0.0) || r > rmax * (1.0 + 1e-12))
    throw RangeError(fmt::format("radial grid: radius {} outside [0, {}]", r, rmax));
  r = std::min(r, rmax);
  auto it = std::upper_bound(r_.begin(), r_.end(), r);
  std::size_t idx = it == r_.begin() ? 0 : static_cast<std::size_t>(it - r_.begin()) - 1;
  if (idx >= r_.size() - 1) idx = r_.size() - 2;
  k = idx;
  t = (r - r_[k]) / (r_[k + 1] - r_[k]);
}

HermiteStencil hermite_stencil(const RadialGrid& grid, double r) {
  HermiteStencil st;
  double t;
  grid.locate(r, st.k, t);
  st.t = t;
  const double r0 = grid[st.k], r1 = grid[st.k + 1];
  auto weights = [](double t, double h, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = 2.0 * t3 - 3.0 * t2 + 1.0;
    w[1] = -2.0 * t3 + 3.0 * t2;
    w[2] = h * (t3 - 2.0 * t2 + t);
    w[3] = h * (t3 - t2);
  };
  double w[4];
  weights(t, r1 - r0, w);
  st.a = w[0];
  st.b = w[1];
  st.c = w[2];
  st.e = w[3];
  const double rc = std::clamp(r, r0, r1);
  const double hx = (r1 - r0) * (r1 + r0);
  weights((rc - r0) * (rc + r0) / hx, hx, w);
  st.ax = w[0];
  st.bx = w[1];
  st.cx = w[2];
  st.ex = w[3];
  return st;
}

RadialCharFn::RadialCharFn(std::shared_ptr<const RadialGrid> grid, std::vector<double> values,
                           std::optional<Interpolation> interp)
    : grid_(std::move(grid)), psi_(std::move(values)) {
  if (!grid_ || psi_.size() != grid_->size())
    throw DomainError("radial characteristic function: value count does not match the grid");
  dev_.resize(psi_.size());
  for (std::size_t i = 0; i < psi_.size(); ++i) dev_[i] = 1.0 - psi_[i];
  prepare(interp);
}

RadialCharFn RadialCharFn::from_deviation(std::shared_ptr<const RadialGrid> grid, std::vector<double> u,
                                          std::optional<Interpolation> interp,
                                          std::optional<double> holder) {
  if (!grid || u.size() != grid->size())
    throw DomainError("radial characteristic function: value count does not match the grid");
  RadialCharFn f;
  f.grid_ = std::move(grid);
  f.psi_.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) f.psi_[i] = 1.0 - u[i];
  f.dev_ = std::move(u);
  f.prepare(interp, holder);
  return f;
}

void RadialCharFn::prepare(std::optional<Interpolation> interp, std::optional<double> holder) {
  const std::size_t n = psi_.size();
  const auto r = grid_->radii();

  // log|u| = c + p log r + q r over the five smallest positive radii; the
  // linear term absorbs the leading correction to the power law
  std::vector<double> lx, ly, lr;
  for (std::size_t i = 1; i < std::min<std::size_t>(6, n); ++i) {
    const double d = std::abs(dev_[i]);
    if (!(d > 1e-300)) continue;
    lx.push_back(std::log(r[i]));
    ly.push_back(std::log(d));
    lr.push_back(r[i]);
  }
  holder_ = std::numeric_limits<double>::infinity();
  if (lx.size() >= 4) {
    Eigen::MatrixXd A(lx.size(), 3);
    Eigen::VectorXd y(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = lx[i];
      A(i, 2) = lr[i];
      y(i) = ly[i];
    }
    holder_ = A.colPivHouseholderQr().solve(y)(1);
  } else if (lx.size() >= 2) {
    holder_ = (ly.back() - ly.front()) / (lx.back() - lx.front());
  }
  if (holder) holder_ = *holder;
  interp_ = interp ? *interp : (holder_ >= 1.95 ? Interpolation::square : Interpolation::radius);

  slope_ = limited_slopes(r, dev_);
  switch_ = 0;
  slope_x_.clear();
  if (interp_ == Interpolation::square) {
    std::vector<double> x(r.begin(), r.end());
    for (double& v : x) v *= v;
    slope_x_ = limited_slopes(x, dev_);
    const double r_lin = grid_->spec().r_lin;
    while (switch_ + 1 < n && r[switch_ + 1] <= r_lin * (1.0 + 1e-12)) ++switch_;
  }
}

double RadialCharFn::deviation(const HermiteStencil& st) const {
  if (st.k == 0 && switch_ == 0 && std::isfinite(holder_) && holder_ > 0.0) {
    const double p = holder_;
    const double u1 = dev_[1];
    const double v = std::pow(st.t, p) * (u1 + ((*grid_)[1] * slope_[1] - p * u1) * (st.t - 1.0));
    return std::clamp(v, 0.0, 2.0);
  }
  const double v =
      st.k < switch_
          ? st.ax * dev_[st.k] + st.bx * dev_[st.k + 1] + st.cx * slope_x_[st.k] + st.ex * slope_x_[st.k + 1]
          : st.a * dev_[st.k] + st.b * dev_[st.k + 1] + st.c * slope_[st.k] + st.e * slope_[st.k + 1];
  return std::clamp(v, 0.0, 2.0);
}

double RadialCharFn::eval(const HermiteStencil& st) const { return 1.0 - deviation(st); }

double RadialCharFn::deviation(double r) const { return deviation(hermite_stencil(*grid_, r)); }

double RadialCharFn::eval(double r) const { return 1.0 - deviation(r); }

double RadialCharFn::max_modulus() const {
  double m = 0.0;
  for (double v : psi_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace bobylev
