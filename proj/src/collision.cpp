#include "bobylev/collision.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "bobylev/charfun.hpp"
#include "bobylev/errors.hpp"
#include "bobylev/metric.hpp"

namespace bobylev {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

CollisionOperator::CollisionOperator(const KernelSpec& kernel,
                                     std::shared_ptr<const RadialGrid> grid,
                                     const AngularQuadrature& quad)
    : kernel_(kernel), grid_(std::move(grid)), quad_(quad) {
  kernel_.validate();
  if (!grid_) throw DomainError("collision operator: missing grid");
  if (auto kink = kernel_.kink()) quad_ = quad_.with_breakpoint(*kink);

  const auto th = quad_.nodes();
  const auto om = quad_.weights();
  const std::size_t J = th.size();
  w_.resize(J);
  std::vector<double> c(J), s(J);
  for (std::size_t j = 0; j < J; ++j) {
    w_[j] = kTwoPi * eval_b(kernel_, th[j]) * std::sin(th[j]) * om[j];
    c[j] = std::cos(th[j] / 2.0);
    s[j] = std::sin(th[j] / 2.0);
  }
  gamma2_ = 0.0;
  for (double w : w_) gamma2_ += w;
  if (!kernel_.bounded()) gamma2_ = kInf;

  const std::size_t M = grid_->size();
  plus_.resize(M * J);
  minus_.resize(M * J);
  tail_.resize(M);
  const double u_m = std::sin(quad_.theta_min() / 2.0);
  for (std::size_t i = 0; i < M; ++i) {
    const double r = (*grid_)[i];
    for (std::size_t j = 0; j < J; ++j) {
      plus_[i * J + j] = hermite_stencil(*grid_, std::min(r * c[j], r));
      minus_[i * J + j] = hermite_stencil(*grid_, r * s[j]);
    }
    tail_[i] = hermite_stencil(*grid_, r * u_m);
  }
}

std::vector<double> CollisionOperator::gain(const RadialCharFn& psi) const {
  if (!kernel_.bounded()) throw DomainError("collision gain: kernel is not integrable");
  const std::size_t M = grid_->size(), J = w_.size();
  std::vector<double> out(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(M); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j)
      sum += w_[j] * psi.eval(plus_[i * J + j]) * psi.eval(minus_[i * J + j]);
    out[i] = sum;
  }
  return out;
}

std::vector<double> CollisionOperator::gain_deviation(const RadialCharFn& psi) const {
  if (!kernel_.bounded()) throw DomainError("collision gain: kernel is not integrable");
  const std::size_t M = grid_->size(), J = w_.size();
  std::vector<double> out(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(M); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double uc = psi.deviation(plus_[i * J + j]);
      const double us = psi.deviation(minus_[i * J + j]);
      sum += w_[j] * (uc + us - uc * us);
    }
    out[i] = sum;
  }
  return out;
}

double CollisionOperator::tail_rate(const RadialCharFn& psi, std::size_t i) const {
  if (kernel_.bounded()) return 0.0;
  const double s2 = 2.0 * kernel_.s;
  const double K = kernel_.K;
  const double u_m = std::sin(quad_.theta_min() / 2.0);
  const double r = (*grid_)[i];
  // u(r c) − u(r) ≈ −u'(r) r u²/2 with u = sin(θ/2)
  double t = -2.0 * K * psi.deviation_slope(i) * r * std::pow(u_m, 2.0 - s2) / (2.0 - s2);
  const double p = psi.holder_exponent();
  if (std::isfinite(p) && p > s2)
    t += 4.0 * K * psi[i] * psi.deviation(tail_[i]) * std::pow(u_m, -s2) / (p - s2);
  return kTwoPi * t;
}

std::vector<double> CollisionOperator::rate(const RadialCharFn& psi) const {
  const std::size_t M = grid_->size(), J = w_.size();
  const auto u = psi.deviations();
  std::vector<double> out(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(M); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double uc = psi.deviation(plus_[i * J + j]);
      const double us = psi.deviation(minus_[i * J + j]);
      sum += w_[j] * ((uc - u[i]) + us * (1.0 - uc));
    }
    out[i] = sum + tail_rate(psi, i);
  }
  return out;
}

std::vector<double> CollisionOperator::frozen_decay(const RadialCharFn& psi) const {
  const std::size_t M = grid_->size(), J = w_.size();
  std::vector<double> out(M);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(M); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const HermiteStencil& st = plus_[i * J + j];
      double beta = 0.0;
      if (st.k + 1 == i) beta = st.b;
      else if (st.k == i) beta = st.a;
      sum += w_[j] * (1.0 - beta * psi.eval(minus_[i * J + j]));
    }
    out[i] = sum;
  }
  return out;
}

std::vector<double> CollisionOperator::panel_contributions(const RadialCharFn& psi,
                                                           std::size_t i,
                                                           std::vector<double>* noise) const {
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const std::size_t J = w_.size();
  const double ui = psi.deviations()[i];
  const std::size_t P = quad_.panel_count();
  std::vector<double> out(P, 0.0);
  if (noise) noise->assign(P, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    double sum = 0.0, err = 0.0;
    for (std::size_t j = quad_.panel_begin(p); j < quad_.panel_begin(p + 1); ++j) {
      const double uc = psi.deviation(plus_[i * J + j]);
      const double us = psi.deviation(minus_[i * J + j]);
      sum += w_[j] * ((uc - ui) + us * (1.0 - uc));
      err += std::abs(w_[j]) * (std::abs(uc) + std::abs(ui) + std::abs(us));
    }
    out[P - 1 - p] = sum;
    if (noise) (*noise)[P - 1 - p] = 8.0 * kEps * err;
  }
  return out;
}

std::vector<double> collision_gain(const RadialCharFn& psi, const KernelSpec& kernel,
                                   const AngularQuadrature& quad) {
  if (!kernel.bounded()) throw DomainError("collision gain: kernel is not integrable");
  return CollisionOperator(kernel, psi.grid_ptr(), quad).gain(psi);
}

void check_panel_decay(const CollisionOperator& op, const RadialCharFn& psi) {
  constexpr std::size_t kGroup = 3;
  const std::size_t P = op.quad().panel_count();
  if (P < 2 * kGroup) return;
  for (std::size_t i = 1; i < psi.size(); ++i) {
    std::vector<double> noise;
    const auto c = op.panel_contributions(psi, i, &noise);
    double outer = 0.0, inner = 0.0, floor = 0.0;
    for (std::size_t k = 0; k < kGroup; ++k) {
      outer += c[P - 2 * kGroup + k];
      inner += c[P - kGroup + k];
      floor += noise[P - 2 * kGroup + k] + noise[P - kGroup + k];
    }
    if (std::abs(inner) > std::abs(outer) && std::abs(inner) > floor)
      throw DivergenceError(fmt::format(
          "collision integral: panel contributions do not decay toward θ = 0 at r = {} "
          "(innermost {}, preceding {}); the data must be Hölder at 0 with exponent above 2s = {}",
          psi.grid()[i], inner, outer, 2.0 * op.kernel().s));
  }
}

std::vector<double> rhs_noncutoff(const RadialCharFn& psi, const KernelSpec& kernel,
                                  const AngularQuadrature& quad) {
  kernel.validate();
  if (!kernel.bounded() && !(psi.holder_exponent() > 2.0 * kernel.s))
    throw DivergenceError(fmt::format(
        "collision integral: Hölder exponent {} at 0 does not exceed 2s = {}",
        psi.holder_exponent(), 2.0 * kernel.s));
  const CollisionOperator op(kernel, psi.grid_ptr(), quad);
  auto out = op.rate(psi);
  check_panel_decay(op, psi);
  for (double& v : out) v = -v;
  return out;
}

RhsBound rhs_mnorm_bound(const RadialCharFn& psi, const KernelSpec& kernel, double alpha,
                         const AngularQuadrature& quad) {
  RhsBound out;
  const auto rhs = rhs_noncutoff(psi, kernel, quad);
  const auto r = psi.grid().radii();
  const std::size_t M = r.size();
  std::vector<double> g(M, 0.0);
  for (std::size_t i = 1; i < M; ++i) g[i] = std::abs(rhs[i]) * std::pow(r[i], -1.0 - alpha);

  // power law g ~ r^q on the first interval
  double first = 0.0;
  if (g[1] > 0.0 && g[2] > 0.0) {
    const double q = std::log(g[2] / g[1]) / std::log(r[2] / r[1]);
    if (q <= -1.0) out.divergent = true;
    else first = g[1] * r[1] / (q + 1.0);
  }
  double sum = first;
  for (std::size_t i = 1; i + 1 < M; ++i) sum += 0.5 * (g[i] + g[i + 1]) * (r[i + 1] - r[i]);
  out.lhs = out.divergent ? kInf : 4.0 * std::numbers::pi * sum;

  const auto kf = kernel_factor(kernel, alpha, quad);
  out.kernel_factor = kf.value;
  const auto mn = m_norm(CharFn::radial_grid(psi), CharFn::unit(), alpha);
  out.m_norm = mn.divergent ? kInf : mn.estimate();
  out.scale = out.kernel_factor * out.m_norm;
  if (kf.divergent || mn.divergent) out.divergent = true;
  return out;
}

}  // namespace bobylev
