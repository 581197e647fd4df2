#pragma once

#include <span>
#include <string>
#include <vector>

#include "bobylev/radial_grid.hpp"
#include "bobylev/solver.hpp"

namespace bobylev {

/// Velocity-space density f(|v|) of an isotropic law.
struct DensityProfile {
  std::vector<double> v;
  std::vector<double> f;
  double R = 0.0;                 // truncation radius of the inversion
  double truncation_error = 0.0;  // pointwise bound on f from the omitted tail
  double quadrature_error = 0.0;  // max over v of the Simpson error estimate
  bool applicable = true;         // false when ψ does not decay (no density)
  double mass = 0.0;              // 4π ∫ f v² dv over the speed grid
  double mass_error = 0.0;        // quadrature, negative-value noise and truncation
  bool mass_ok = false;
  double min_value = 0.0;
  bool negative_lobes = false;  // some f < −1e-6
  double clipped_mass = 0.0;    // 4π ∫ |f| v² dv over −1e-6 <= f < 0
  std::string note;

  /// applicable, mass within its error and no lobes below −1e-6.
  [[nodiscard]] bool valid() const { return applicable && mass_ok && !negative_lobes; }
};

/// f(v) = (1 / (2π² v)) ∫₀^R ψ(r) r sin(r v) dr by composite Simpson on a
/// uniform r grid. The truncation error is extrapolated from the decay of
/// ∫ |ψ| r² dr over [R/4, R/2] and [R/2, R]; without decay the profile is
/// flagged not applicable. Speeds must be positive and increasing.
DensityProfile inverse_transform(const RadialCharFn& psi, std::span<const double> v, double R);

/// Uniform speed grid of n points on (0, v_max].
std::vector<double> speed_grid(double v_max, std::size_t n);

struct SobolevNorm {
  double value = 0.0;      // ‖f‖²_{H^N} truncated at R
  double previous = 0.0;   // same at R/2
  bool converged = false;  // relative change of the last doubling below 1%
  double growth = 0.0;     // log–log slope of the truncated value over R/8 … R
};

/// (4π / (2π)³) ∫₀^R ⟨r⟩^{2N} |ψ|² r² dr, judged by doubling R.
SobolevNorm sobolev_norm(const RadialCharFn& psi, int N, double R);

struct EntropyMoments {
  double log1p_entropy = 0.0;  // ∫ f log(1 + f)
  double entropy = 0.0;        // ∫ f log f over f > 0
  double negative_part = 0.0;  // ∫ f log⁻ f (<= 0)
  double negative_bound = 0.0;  // ∫ e^{−⟨v⟩^α} dv + ∫ ⟨v⟩^α f, bounds −negative_part
  double moment = 0.0;         // ∫ ⟨v⟩^α f
  double abs_moment = 0.0;     // ∫ |v|^α f
  double abs_moment_error = 0.0;  // quadrature, negative-value noise and pointwise errors
  double clipped_mass = 0.0;
  bool consistent = false;     // log1p_entropy <= entropy + mass log 2 + negative_bound
};

/// Integrals over the speed grid with weight 4πv². Throws VerificationError
/// when the profile is not valid.
EntropyMoments entropy_and_moments(const DensityProfile& f, double alpha);

/// sup_{r >= R0} |ψ(r)| over the grid nodes.
double fourier_tail_sup(const RadialCharFn& psi, double R0);

struct MomentTrackRow {
  double t = 0.0;
  double lhs = 0.0;  // moment_upper(φ(t), α′)
  double rhs = 0.0;
  bool pass = false;
};

struct MomentTrackReport {
  double constant = 0.0;          // C_{α′,α,3} / (2 c_{α′,3,∞})
  double initial_sup_norm = 0.0;  // ‖φ₀ − 1‖_α
  std::vector<MomentTrackRow> rows;
  bool pass = true;
};

/// Per snapshot, moment_upper(φ(t), α′) against
/// C_{α′,α,3} / (2 c_{α′,3,∞}) · (e^{λ_α t} ‖φ₀ − 1‖_α)^{α′/α}.
MomentTrackReport moment_trajectory_check(const Trajectory& traj, double alpha, double alpha_prime,
                                          double lambda_alpha);

}  // namespace bobylev
