#pragma once

#include <optional>
#include <string>

#include "bobylev/quadrature.hpp"

namespace bobylev {

/// Angular collision kernel b(cos θ) on (0, π/2], optionally capped at n.
///
/// The singular family is b = K (sin θ/2)^{-2-2s}, which behaves like
/// K 2^{2+2s} θ^{-2-2s} as θ → 0.
struct KernelSpec {
  enum class Family { constant, singular };

  Family family = Family::constant;
  double b0 = 1.0;  // constant family
  double s = 0.25;  // singular family
  double K = 1.0;   // singular family
  std::optional<double> cutoff;

  static KernelSpec constant(double b0);
  static KernelSpec singular(double s, double K = 1.0);
  [[nodiscard]] KernelSpec with_cutoff(double n) const;

  /// Throws ConfigError when parameters are out of range.
  void validate() const;

  /// True when b is bounded (constant family or any cutoff).
  [[nodiscard]] bool bounded() const;

  /// Angle where a singular kernel meets its cap, if that lies inside
  /// (0, π/2); otherwise nullopt.
  [[nodiscard]] std::optional<double> kink() const;

  /// sup over (0, π/2] of b.
  [[nodiscard]] double sup() const;

  [[nodiscard]] std::string describe() const;
};

double eval_b(const KernelSpec& spec, double theta);

/// A kernel constant: value (or +inf with divergent set) and an error
/// estimate from comparison against the bisected rule.
struct KernelConstant {
  double value = 0.0;
  double est_error = 0.0;
  bool divergent = false;
};

struct ConstantOptions {
  double rel_tolerance = 1e-6;  // refinement disagreement triggering AccuracyError
};

/// 2π ∫ b sin θ dθ over (0, π/2].
KernelConstant gamma2(const KernelSpec& spec, const AngularQuadrature& quad,
                      const ConstantOptions& opt = {});

/// 2π ∫ b (cos^α θ/2 + sin^α θ/2) sin θ dθ, α ∈ (0, 2].
KernelConstant gamma_alpha(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                           const ConstantOptions& opt = {});

/// 2π ∫ b (cos^α θ/2 + sin^α θ/2 − 1) sin θ dθ, α ∈ (0, 2].
KernelConstant lambda_alpha(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                            const ConstantOptions& opt = {});

/// ∫_0^1 (1−τ)^{α/2} b(τ) dτ with τ = cos θ; the factor scaling the
/// ℳ^α-norm of the collision term.
KernelConstant kernel_factor(const KernelSpec& spec, double alpha, const AngularQuadrature& quad,
                             const ConstantOptions& opt = {});

AngularQuadrature build_quadrature(double theta_min, int panel_count, int nodes_per_panel,
                                   double grading);

/// cos^α(θ/2) + sin^α(θ/2) − 1 without cancellation at small θ.
double alpha_weight(double alpha, double theta);

}  // namespace bobylev
