#pragma once

#include <memory>
#include <vector>

#include "bobylev/kernel.hpp"
#include "bobylev/radial_grid.hpp"

namespace bobylev {

/// Isotropic collision operator on a radial grid.
///
/// For ψ(r) = φ(|ξ|) the post-collisional radii are r cos(θ/2) and
/// r sin(θ/2), both at most r, so every evaluation stays on the grid. The
/// interpolation stencils of those radii are precomputed for every
/// (grid node, angular node) pair.
///
/// With u = 1 − ψ the equation reads
///   ∂_t u = 2π ∫ b [(u(r c) − u(r)) + u(r s) ψ(r c)] sin θ dθ,
/// where the first bracket carries the θ → 0 cancellation.
class CollisionOperator {
 public:
  CollisionOperator(const KernelSpec& kernel, std::shared_ptr<const RadialGrid> grid,
                    const AngularQuadrature& quad);

  [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
  [[nodiscard]] const RadialGrid& grid() const { return *grid_; }
  [[nodiscard]] std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
  [[nodiscard]] const AngularQuadrature& quad() const { return quad_; }

  /// Σ_j w_j, the discrete γ₂ consistent with gain(); +inf for an uncut
  /// singular kernel.
  [[nodiscard]] double gamma2() const { return gamma2_; }

  /// 𝒢(ψ)_i = 2π ∫ b ψ(r_i c) ψ(r_i s) sin θ dθ. Bounded kernels only.
  [[nodiscard]] std::vector<double> gain(const RadialCharFn& psi) const;

  /// γ₂ − 𝒢(ψ) written in deviations: Σ_j w_j (u_c + u_s − u_c u_s).
  /// Bounded kernels only.
  [[nodiscard]] std::vector<double> gain_deviation(const RadialCharFn& psi) const;

  /// ∂_t u on the grid, including the [0, θ_min] tail for uncut kernels.
  [[nodiscard]] std::vector<double> rate(const RadialCharFn& psi) const;

  /// Diagonal part of −∂(rate)/∂u: Σ_j w_j (1 − β_ij ψ(r_i s_j)), where β_ij
  /// is the weight of node i in the interpolant at r_i cos(θ_j/2).
  [[nodiscard]] std::vector<double> frozen_decay(const RadialCharFn& psi) const;

  /// Per-panel contributions to rate() at node i, ordered from the panel
  /// at π/2 down to θ_min. When noise is given it receives a rounding-level
  /// bound for each contribution.
  [[nodiscard]] std::vector<double> panel_contributions(const RadialCharFn& psi, std::size_t i,
                                                        std::vector<double>* noise = nullptr) const;

 private:
  [[nodiscard]] double tail_rate(const RadialCharFn& psi, std::size_t i) const;

  KernelSpec kernel_;
  std::shared_ptr<const RadialGrid> grid_;
  AngularQuadrature quad_;
  std::vector<double> w_;                 // 2π b(θ_j) sin θ_j ω_j
  std::vector<HermiteStencil> plus_;      // r_i cos(θ_j/2), row-major (i, j)
  std::vector<HermiteStencil> minus_;     // r_i sin(θ_j/2)
  std::vector<HermiteStencil> tail_;      // r_i sin(θ_min/2)
  double gamma2_ = 0.0;
};

/// Gain term of a bounded kernel on the grid of ψ.
std::vector<double> collision_gain(const RadialCharFn& psi, const KernelSpec& kernel,
                                   const AngularQuadrature& quad);

/// ∂_t ψ = 2π ∫ b [ψ(r c) ψ(r s) − ψ(r)] sin θ dθ for any kernel. Throws
/// DivergenceError when the Hölder exponent of ψ at 0 does not exceed 2s
/// or when panel contributions fail to decay toward θ = 0.
std::vector<double> rhs_noncutoff(const RadialCharFn& psi, const KernelSpec& kernel,
                                  const AngularQuadrature& quad);

/// Checks that per-panel contributions shrink toward θ_min at every node;
/// throws DivergenceError otherwise.
void check_panel_decay(const CollisionOperator& op, const RadialCharFn& psi);

/// ∫ |∂_t ψ| |ξ|^{-3-α} dξ over the grid, reported with the kernel factor
/// times ‖1 − ψ‖_{ℳ^α} for comparison.
struct RhsBound {
  double lhs = 0.0;
  double kernel_factor = 0.0;
  double m_norm = 0.0;
  double scale = 0.0;  // kernel_factor · m_norm
  bool divergent = false;
};

RhsBound rhs_mnorm_bound(const RadialCharFn& psi, const KernelSpec& kernel, double alpha,
                         const AngularQuadrature& quad);

}  // namespace bobylev
