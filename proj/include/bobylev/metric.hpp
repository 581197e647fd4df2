#pragma once

#include <limits>
#include <string>
#include <vector>

#include "bobylev/charfun.hpp"

namespace bobylev {

/// Value of a (possibly improper) norm or integral together with the
/// truncation that produced it.
struct NormResult {
  double value = 0.0;       // integral over eps <= |ξ| <= R, or the sup
  double eps = 0.0;
  double R = 0.0;
  double tail_bound = 0.0;  // rigorous bound on the |ξ| > R part
  double inner = 0.0;       // power-law estimate of the |ξ| < eps part
  double est_error = 0.0;   // quadrature error estimate of value
  bool divergent = false;
  std::string growth;       // "", "logarithmic" or "power" when divergent

  /// value + inner: best estimate of the untruncated quantity.
  [[nodiscard]] double estimate() const { return value + inner; }
};

/// |S^{d-1}|.
double sphere_area(int dim);

/// Quadrature on S^{d-1}: product Gauss (12 in cos θ) × 20 equispaced
/// azimuths in 3-D, 240 equispaced angles in 2-D, {±1} in 1-D. Weights sum
/// to |S^{d-1}|.
struct SphereRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
};
const SphereRule& sphere_rule(int dim);
/// Finer product rule (48 × 96 in 3-D, 256 angles in 2-D) for integrals of
/// direction-dependent integrands up to |ξ| max|v| = 40.
const SphereRule& sphere_rule_fine(int dim);

struct IntegralOptions {
  double eps = 1e-7;
  double R = 1e7;
  int per_decade = 16;
  /// Oscillating integrands are resolved up to this many periods.
  double max_periods = 1e4;
};

struct SupOptions {
  double r_lo = 1e-4;
  double r_hi = 1e4;
  int per_decade = 200;
};

/// sup_ξ |φ − φ̃| / |ξ|^α.
NormResult sup_norm(const CharFn& a, const CharFn& b, double alpha, const SupOptions& opt = {});

/// ∫_{eps <= |ξ| <= R} |φ − φ̃| / |ξ|^{d+α} dξ with tail bound and ε-halving
/// divergence verdict. R is lowered for oscillating operands: to a finite
/// number of periods for isotropic ones and to |ξ| max|v| <= 40 for
/// direction-dependent ones.
NormResult m_norm(const CharFn& a, const CharFn& b, double alpha, const IntegralOptions& opt = {});

/// ‖φ − φ̃‖_{ℳ^α} + ‖φ − φ̃‖_β.
NormResult dis_ab(const CharFn& a, const CharFn& b, double alpha, double beta,
                  const IntegralOptions& iopt = {}, const SupOptions& sopt = {});

/// ∫_{|ζ| <= M} sin²(ζ_1/2) / |ζ|^{d+α} dζ; M may be +inf. Memoized.
double c_constant(double alpha, int dim, double M = std::numeric_limits<double>::infinity());

/// (1/(2 c_{α,d,1})) ∫_{|ξ| <= 1/R} |1 − φ| / |ξ|^{d+α} dξ: upper bound for
/// the α-moment of F outside the ball of radius R.
double tail_moment_bound(const CharFn& phi, double alpha, double R);

/// (1/(2 c_{α,d,∞})) ‖φ − 1‖_{ℳ^α}, bracketed from above.
NormResult moment_upper(const CharFn& phi, double alpha, const IntegralOptions& opt = {});

/// ∫ Re(1 − φ) / |ξ|^{d+α} dξ / (2 c_{α,d,∞}) = ∫ |v|^α dF.
NormResult moment_exact(const CharFn& phi, double alpha, const IntegralOptions& opt = {});

/// ‖φ − 1‖_{ℳ^α} against C ‖φ − 1‖_β^{α/β}.
///
/// For β > α the constant C = 2|S|/α + |S|/(β − α) from splitting the
/// integral at R = ‖φ − 1‖_β^{-1/β} makes rhs a proven bound. For β = α the
/// split constant degenerates; for β < α no finite constant exists (stable
/// laws of index β are counterexamples). In both cases rhs is +inf and the
/// matching flag is set.
struct EmbeddingCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
  bool lhs_divergent = false;
  bool degenerate = false;    // β == α
  bool inapplicable = false;  // β < α
  bool holds = false;
};
EmbeddingCheck embedding_check(const CharFn& phi, double alpha, double beta);

/// 2|S|/α + |S|/(β − α): ‖φ − 1‖_{ℳ^α} <= C ‖φ − 1‖_β^{α/β} for β > α.
double embedding_constant(double alpha, double beta, int dim);

/// sup_{x>0} |e^{-ix} − 1 + i x [α > 1]| / x^α: the constant with
/// ‖φ − 1‖_α <= C1 ∫ |v|^α dF (mean-zero F when α > 1).
double taylor_constant(double alpha);

/// C1 = taylor_constant(α) and C2 = C1 / (2 c_{α,d,∞}), so that
/// ‖φ − 1‖_α <= C1 m_α <= C2 ‖φ − 1‖_{ℳ^α}.
struct SandwichConstants {
  double C1;
  double C2;
};
SandwichConstants sandwich_constants(double alpha, int dim);

/// Fixture table of c_{α,d,M}.
struct CFixture {
  double alpha;
  int dim;
  double M;
  double value;
};
std::vector<CFixture> compute_c_fixtures();
void write_c_fixtures(const std::string& path, const std::vector<CFixture>& rows);
std::vector<CFixture> read_c_fixtures(const std::string& path);

}  // namespace bobylev
