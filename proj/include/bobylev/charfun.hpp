#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bobylev/radial_grid.hpp"

namespace bobylev {

/// Point in R^d, d <= 3; unused trailing components are zero.
using Point = std::array<double, 3>;

double norm(const Point& x);
double dot(const Point& x, const Point& y);

/// Finite atomic probability measure on R^d.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// Throws DomainError unless weights are positive and sum to 1.
  DiscreteMeasure(int dim, std::vector<Point> points, std::vector<double> weights);

  /// Reads one atom per line: d coordinates then the weight. Blank lines
  /// and lines starting with '#' are skipped.
  static DiscreteMeasure parse(std::istream& in, int dim);
  static DiscreteMeasure load(const std::string& path, int dim);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::span<const Point> points() const { return points_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }

  [[nodiscard]] bool mean_zero(double tol = 1e-12) const;
  /// Invariant under v -> -v (atom for atom).
  [[nodiscard]] bool symmetric(double tol = 1e-12) const;

  /// Σ w_i |v_i|^α.
  [[nodiscard]] double moment(double alpha) const;
  /// Σ_{|v_i| >= R} w_i |v_i|^α.
  [[nodiscard]] double tail_moment(double alpha, double R) const;
  [[nodiscard]] double max_speed() const;

 private:
  int dim_ = 3;
  std::vector<Point> points_;
  std::vector<double> weights_;
};

/// Seeded random mean-zero measure with at most max_atoms atoms and speeds
/// below max_speed: atoms come in ± pairs, plus an optional atom at 0.
DiscreteMeasure random_mean_zero_measure(std::uint64_t seed, int dim, int max_atoms,
                                         double max_speed);

/// Characteristic function φ(ξ) = ∫ e^{-i v·ξ} dF(v).
class CharFn {
 public:
  struct Unit {};  // φ ≡ 1, the Dirac mass at 0
  struct Gaussian {
    double sigma;
  };
  struct Stable {
    double alpha;
  };
  struct UniformSphere {
    double r0;
  };
  struct Discrete {
    DiscreteMeasure measure;
  };
  struct Grid {
    std::shared_ptr<const RadialCharFn> psi;
  };
  using Variant = std::variant<Unit, Gaussian, Stable, UniformSphere, Discrete, Grid>;

  static CharFn unit(int dim = 3);
  static CharFn gaussian(double sigma, int dim = 3);
  static CharFn stable(double alpha, int dim = 3);
  static CharFn uniform_sphere(double r0, int dim = 3);
  static CharFn discrete(DiscreteMeasure m);
  static CharFn radial_grid(RadialCharFn psi);

  [[nodiscard]] const Variant& variant() const { return v_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::string name() const;

  /// Isotropic variants are functions of |ξ| only (real valued).
  [[nodiscard]] bool isotropic() const;

  [[nodiscard]] std::complex<double> eval(const Point& xi) const;
  /// φ(r e_1). Real for isotropic variants.
  [[nodiscard]] std::complex<double> eval_along(double r) const;
  /// Real profile ψ(r) of an isotropic variant; VariantError otherwise.
  [[nodiscard]] double radial(double r) const;
  /// 1 − ψ(r) for isotropic variants, accurate for small r.
  [[nodiscard]] double radial_deviation(double r) const;
  /// 1 − φ(ξ), accurate for small ξ.
  [[nodiscard]] std::complex<double> deviation(const Point& xi) const;

  /// Spherical average of Re(1 − φ) over |ξ| = r; equals radial_deviation
  /// for isotropic variants.
  [[nodiscard]] double spherical_mean_deviation(double r) const;

  /// Angular frequency of the slowest-decaying oscillation in r (largest
  /// atom speed or sphere radius); 0 for non-oscillating profiles.
  [[nodiscard]] double oscillation() const;

  /// Largest radius at which the function can be evaluated.
  [[nodiscard]] double max_radius() const;

 private:
  CharFn(Variant v, int dim) : v_(std::move(v)), dim_(dim) {}
  Variant v_;
  int dim_;
};

/// ψ_i = Re φ(r_i e_1) on the grid. VariantError for non-isotropic input.
RadialCharFn sample_radial(const CharFn& phi, std::shared_ptr<const RadialGrid> grid);

/// max over pairs of |φ(ξ) − φ(ξ+η)| − (4|1−φ(ξ)|^{1/2}|1−φ(η)|^{1/2} + |1−φ(η)|).
double holder_inequality_check(const CharFn& phi,
                               std::span<const std::pair<Point, Point>> pairs);

/// Smallest eigenvalue of the Hermitian Gram matrix [φ(ξ_i − ξ_j)], k <= 64.
double bochner_spotcheck(const CharFn& phi, std::span<const Point> points);
/// Same for a raw radial profile f(|ξ|).
double bochner_spotcheck(const std::function<double(double)>& profile,
                         std::span<const Point> points);

}  // namespace bobylev
