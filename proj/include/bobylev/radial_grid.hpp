#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace bobylev {

/// Mixed grid: linear on [0, r_lin], logarithmic on [r_lin, r_max], with the
/// spacing continuous at r_lin.
struct GridSpec {
  int intervals = 512;
  double r_max = 64.0;
  double r_lin = 1.0;
};

class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> make(const GridSpec& spec);
  /// Grid on explicit radii; must start at 0 and increase strictly.
  static std::shared_ptr<const RadialGrid> from_radii(std::vector<double> radii);

  [[nodiscard]] std::span<const double> radii() const { return r_; }
  [[nodiscard]] std::size_t size() const { return r_.size(); }
  [[nodiscard]] double r_max() const { return r_.back(); }
  [[nodiscard]] double operator[](std::size_t i) const { return r_[i]; }
  [[nodiscard]] const GridSpec& spec() const { return spec_; }

  /// Interval k with r_k <= r <= r_{k+1} and local coordinate t in [0,1].
  /// Throws RangeError for r outside [0, r_max].
  void locate(double r, std::size_t& k, double& t) const;

 private:
  std::vector<double> r_;
  GridSpec spec_;
};

/// Cubic Hermite weights for a point in interval k:
/// value = a y_k + b y_{k+1} + c d_k + e d_{k+1} with slopes d in r units,
/// and the same with ax..ex for interpolation in x = r² (slopes in x units).
struct HermiteStencil {
  std::size_t k = 0;
  double t = 0.0;  // local coordinate in [0, 1]
  double a = 1.0, b = 0.0, c = 0.0, e = 0.0;
  double ax = 1.0, bx = 0.0, cx = 0.0, ex = 0.0;
};

/// Interpolation variable near the origin: r, or r² on [0, r_lin] for data
/// that are smooth and even at 0, whose interpolation error then vanishes
/// like r⁴ at the origin. Beyond r_lin both use r.
enum class Interpolation { radius, square };

HermiteStencil hermite_stencil(const RadialGrid& grid, double r);

/// Isotropic characteristic function sampled on a radial grid, ψ_i = φ(r_i).
///
/// Off-grid values come from a cubic Hermite interpolant of 1 − ψ whose node
/// slopes are fourth-order finite differences, limited on locally monotone
/// stretches so that no new extrema appear there; results are clamped to
/// [-1, 1]. In radius mode the first interval instead uses
/// u = τ^p (u₁ + (r₁u₁′ − p u₁)(τ − 1)), τ = r/r₁, with p the Hölder
/// exponent, which matches value and slope at r₁ and keeps the power law
/// below the grid resolution.
class RadialCharFn {
 public:
  RadialCharFn() = default;
  /// Without an explicit choice the variable is r² when the Hölder
  /// exponent at 0 is at least 1.95, else r.
  RadialCharFn(std::shared_ptr<const RadialGrid> grid, std::vector<double> values,
               std::optional<Interpolation> interp = std::nullopt);
  /// Builds ψ = 1 − u from deviations u, keeping u exactly. A given holder
  /// replaces the fitted exponent.
  static RadialCharFn from_deviation(std::shared_ptr<const RadialGrid> grid, std::vector<double> u,
                                     std::optional<Interpolation> interp = std::nullopt,
                                     std::optional<double> holder = std::nullopt);

  [[nodiscard]] const RadialGrid& grid() const { return *grid_; }
  [[nodiscard]] std::shared_ptr<const RadialGrid> grid_ptr() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return psi_; }
  [[nodiscard]] double operator[](std::size_t i) const { return psi_[i]; }
  [[nodiscard]] std::size_t size() const { return psi_.size(); }

  /// Interpolated ψ(r); RangeError beyond r_max.
  [[nodiscard]] double eval(double r) const;
  [[nodiscard]] double eval(const HermiteStencil& st) const;

  /// 1 − ψ(r) without the cancellation of forming ψ first.
  [[nodiscard]] double deviation(double r) const;
  [[nodiscard]] double deviation(const HermiteStencil& st) const;
  [[nodiscard]] std::span<const double> deviations() const { return dev_; }
  /// d(1 − ψ)/dr at node i as used by the interpolant.
  [[nodiscard]] double deviation_slope(std::size_t i) const { return slope_[i]; }
  [[nodiscard]] Interpolation interpolation() const { return interp_; }

  /// Exponent p of |1 − ψ| ≈ A r^p e^{q r} fitted over the five smallest
  /// positive radii;
  /// +inf when ψ is identically 1 there.
  [[nodiscard]] double holder_exponent() const { return holder_; }

  /// max_i |ψ_i|.
  [[nodiscard]] double max_modulus() const;

 private:
  void prepare(std::optional<Interpolation> interp, std::optional<double> holder = std::nullopt);

  std::shared_ptr<const RadialGrid> grid_;
  std::vector<double> psi_;
  std::vector<double> dev_;    // 1 − ψ
  std::vector<double> slope_;    // d(1 − ψ)/dr
  std::vector<double> slope_x_;  // d(1 − ψ)/d(r²), square mode only
  std::size_t switch_ = 0;       // intervals below this use x = r²
  Interpolation interp_ = Interpolation::radius;
  double holder_ = std::numeric_limits<double>::infinity();
};

}  // namespace bobylev
