#include "bobylev/kernel.hpp"

#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "bobylev/errors.hpp"

namespace bobylev {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw DomainError(fmt::format("{}: alpha must lie in (0, 2], got {}", what, alpha));
}

// Leading small-u behaviour of an angular weight, A u^p, for the analytic
// tail of an uncut singular kernel.
struct PowerTerm {
  double A;
  double p;
};

// ∫_0^{u_m} K u^{-2-2s} A u^p 4u du summed over terms.
double singular_tail(const KernelSpec& k, double u_m, const std::vector<PowerTerm>& terms) {
  double sum = 0.0;
  for (const auto& t : terms) sum += 4.0 * k.K * t.A * std::pow(u_m, t.p - 2.0 * k.s) / (t.p - 2.0 * k.s);
  return sum;
}

// ∫ b(θ) g(θ) sin θ dθ on the quadrature (with kink), plus the [0, θ_min]
// tail, checked against the bisected rule.
KernelConstant integrate_weight(const KernelSpec& spec, const AngularQuadrature& quad,
                                const std::function<double(double)>& g,
                                const std::vector<PowerTerm>& small_u, double scale,
                                const ConstantOptions& opt, const char* what) {
  spec.validate();
  AngularQuadrature q = quad;
  if (auto kink = spec.kink()) q = q.with_breakpoint(*kink);
  const auto body = [&](double th) { return eval_b(spec, th) * g(th) * std::sin(th); };

  const double th0 = q.theta_min();
  double tail = 0.0;
  if (spec.bounded()) {
    tail = eval_b(spec, th0) * g(th0) * (1.0 - std::cos(th0));
  } else {
    tail = singular_tail(spec, std::sin(th0 / 2.0), small_u);
  }
  const double coarse = q.integrate(body);
  const double fine = q.refined().integrate(body);
  KernelConstant out;
  out.value = scale * (fine + tail);
  // The tail keeps the leading terms of the weight, so its relative error
  // is of the order of the first dropped power of θ_min.
  out.est_error = scale * (std::abs(fine - coarse) + std::abs(tail) * th0);
  if (!std::isfinite(out.value) ||
      out.est_error > opt.rel_tolerance * std::max(1.0, std::abs(out.value)))
    throw AccuracyError(fmt::format("{}: quadrature refinements disagree (value {}, error {})",
                                    what, out.value, out.est_error));
  return out;
}

KernelConstant divergent() { return {kInf, 0.0, true}; }
}  // namespace

KernelSpec KernelSpec::constant(double b0) {
  KernelSpec k;
  k.family = Family::constant;
  k.b0 = b0;
  return k;
}

KernelSpec KernelSpec::singular(double s, double K) {
  KernelSpec k;
  k.family = Family::singular;
  k.s = s;
  k.K = K;
  return k;
}

KernelSpec KernelSpec::with_cutoff(double n) const {
  KernelSpec k = *this;
  k.cutoff = n;
  return k;
}

void KernelSpec::validate() const {
  if (family == Family::constant && !(b0 > 0.0 && std::isfinite(b0)))
    throw ConfigError(fmt::format("kernel: constant b0 must be positive, got {}", b0));
  if (family == Family::singular) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError(fmt::format("kernel: s must lie in (0, 1), got {}", s));
    if (!(K > 0.0 && std::isfinite(K))) throw ConfigError(fmt::format("kernel: K must be positive, got {}", K));
  }
  if (cutoff && !(*cutoff > 0.0 && std::isfinite(*cutoff)))
    throw ConfigError(fmt::format("kernel: cutoff must be positive, got {}", *cutoff));
}

bool KernelSpec::bounded() const { return family == Family::constant || cutoff.has_value(); }

std::optional<double> KernelSpec::kink() const {
  if (family != Family::singular || !cutoff) return std::nullopt;
  const double u = std::pow(K / *cutoff, 1.0 / (2.0 + 2.0 * s));
  if (!(u < std::sin(kHalfPi / 2.0))) return std::nullopt;
  return 2.0 * std::asin(u);
}

double KernelSpec::sup() const {
  if (family == Family::constant) return cutoff ? std::min(b0, *cutoff) : b0;
  return cutoff ? *cutoff : kInf;
}

std::string KernelSpec::describe() const {
  std::string base = family == Family::constant ? fmt::format("constant(b0={})", b0)
                                                : fmt::format("singular(s={},K={})", s, K);
  if (cutoff) base += fmt::format(",cutoff={}", *cutoff);
  return base;
}

double eval_b(const KernelSpec& spec, double theta) {
  if (!(theta > 0.0 && theta <= kHalfPi * (1.0 + 1e-15)))
    throw DomainError(fmt::format("eval_b: theta must lie in (0, pi/2], got {}", theta));
  double b = spec.family == KernelSpec::Family::constant
                 ? spec.b0
                 : spec.K * std::pow(std::sin(theta / 2.0), -2.0 - 2.0 * spec.s);
  if (spec.cutoff) b = std::min(b, *spec.cutoff);
  return b;
}

double alpha_weight(double alpha, double theta) {
  const double sn = std::sin(theta / 2.0);
  const double cos_part = std::expm1(0.5 * alpha * std::log1p(-sn * sn));
  return cos_part + std::pow(sn, alpha);
}

KernelConstant gamma2(const KernelSpec& spec, const AngularQuadrature& quad,
                      const ConstantOptions& opt) {
  spec.validate();
  if (!spec.bounded()) return divergent();
  return integrate_weight(spec, quad, [](double) { return 1.0; }, {}, 2.0 * kPi, opt, "gamma2");
}

KernelConstant gamma_alpha(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                           const ConstantOptions& opt) {
  check_alpha(alpha, "gamma_alpha");
  spec.validate();
  if (!spec.bounded()) return divergent();
  const auto g = [alpha](double th) {
    return std::pow(std::cos(th / 2.0), alpha) + std::pow(std::sin(th / 2.0), alpha);
  };
  return integrate_weight(spec, quad, g, {}, 2.0 * kPi, opt, "gamma_alpha");
}

KernelConstant lambda_alpha(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                            const ConstantOptions& opt) {
  check_alpha(alpha, "lambda_alpha");
  spec.validate();
  if (alpha == 2.0) return {0.0, 0.0, false};
  if (!spec.bounded() && alpha <= 2.0 * spec.s) return divergent();
  const auto g = [alpha](double th) { return alpha_weight(alpha, th); };
  return integrate_weight(spec, quad, g, {{1.0, alpha}, {-alpha / 2.0, 2.0}}, 2.0 * kPi, opt,
                          "lambda_alpha");
}

KernelConstant kernel_factor(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                             const ConstantOptions& opt) {
  check_alpha(alpha, "kernel_factor");
  spec.validate();
  if (!spec.bounded() && alpha <= 2.0 * spec.s) return divergent();
  const auto g = [alpha](double th) {
    const double sn = std::sin(th / 2.0);
    return std::pow(2.0 * sn * sn, alpha / 2.0);
  };
  return integrate_weight(spec, quad, g, {{std::pow(2.0, alpha / 2.0), alpha}}, 1.0, opt,
                          "kernel_factor");
}

AngularQuadrature build_quadrature(double theta_min, int panel_count, int nodes_per_panel,
                                   double grading) {
  return AngularQuadrature::build(theta_min, panel_count, nodes_per_panel, grading);
}

}  // namespace bobylev
