#pragma once

#include <string>
#include <vector>

#include "bobylev/collision.hpp"
#include "bobylev/kernel.hpp"
#include "bobylev/metric.hpp"
#include "bobylev/radial_grid.hpp"

namespace bobylev {

enum class Integrator { duhamel_picard, exponential_euler };

std::string to_string(Integrator integrator);

struct SolverConfig {
  KernelSpec kernel = KernelSpec::constant(1.0);
  double alpha = 1.0;  // moment index of the contraction guard and diagnostics
  GridSpec grid;
  QuadratureSettings quad;
  double T = 1.0;
  double dt = 0.05;
  double picard_tol = 1e-12;
  int picard_max_iter = 60;
  double time_tol = 1e-6;   // change of the step end value under τ-node doubling
  int max_tau_intervals = 64;
  Integrator integrator = Integrator::duhamel_picard;
  int snapshot_every = 1;
  bool diagnostics = true;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Per-snapshot diagnostics against the constant-1 solution.
struct Diagnostics {
  double t = 0.0;
  double mass = 1.0;         // ψ(t, 0)
  double max_modulus = 1.0;  // max_r |ψ(t, r)|
  double sup_norm = 0.0;     // ‖ψ(t) − 1‖_α
  double m_norm = 0.0;       // ‖ψ(t) − 1‖_{ℳ^α}, NaN for α = 2
  double moment_upper = 0.0;
};

struct StepReport {
  double t = 0.0;            // time at the end of the step
  int iterations = 0;        // Picard iterations of the accepted solve
  int tau_intervals = 0;     // τ-intervals of the accepted solve
  int substeps = 1;          // exponential steps used for this step
  double contraction = 0.0;  // largest measured Picard ratio (0 if unresolved)
  double bound = 0.0;        // γ_α Δt
};

struct Trajectory {
  std::vector<double> times;
  std::vector<RadialCharFn> snapshots;
  std::vector<Diagnostics> diagnostics;
  std::vector<StepReport> steps;
  double gamma2 = 0.0;
  double gamma_alpha = 0.0;
  double lambda_alpha = 0.0;
};

/// Cutoff evolution by the per-step Duhamel fixed point
///   u(τ) = e^{−γ₂(τ−t_n)} u_n + ∫ e^{−γ₂(τ−σ)} H(u(σ)) dσ,  u = 1 − ψ,
/// solved by Picard iteration with the integrand linear between τ-nodes.
/// Requires a bounded kernel and γ_α Δt < 1.
Trajectory duhamel_evolve(const RadialCharFn& psi0, const SolverConfig& cfg);

/// Non-cutoff evolution by second-order exponential time differencing on the
/// cancellation-aware rate, with the frozen diagonal decay treated exactly.
/// Steps are halved when |ψ| exceeds 1; StepSizeError after ten halvings.
Trajectory evolve_noncutoff(const RadialCharFn& psi0, const SolverConfig& cfg);

/// Dispatches on cfg.integrator.
Trajectory evolve(const RadialCharFn& psi0, const SolverConfig& cfg);

/// Diagnostics of one state at time t.
Diagnostics diagnose(const RadialCharFn& psi, double t, double alpha);

/// sup over common snapshot times and grid radii of |ψ_a − ψ_b|.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

struct CutoffStudy {
  std::vector<double> cutoffs;
  std::vector<Trajectory> runs;
  std::vector<std::vector<double>> distances;  // pairwise, symmetric
  std::vector<double> successive;              // d(n_k, n_{k+1})
  bool monotone = false;                       // successive strictly decreasing
  double dt = 0.0;
  bool has_direct = false;
  double direct_distance = 0.0;  // largest cutoff vs direct non-cutoff route
  double integrator_tolerance = 0.0;  // direct route, Δt vs Δt/2
  bool direct_agrees = false;
};

/// Evolves φ₀ under b_n = min(b, n) for each n with a common Δt chosen so
/// that γ_α Δt ≤ 1/2 for the largest n. When with_direct is set, the
/// largest-n run is compared with the direct non-cutoff route.
CutoffStudy cutoff_sequence_study(const RadialCharFn& psi0, const SolverConfig& base,
                                  const std::vector<double>& cutoffs, bool with_direct);

struct StabilityRow {
  double t = 0.0;
  double m_lhs = 0.0, m_rhs = 0.0, m_ratio = 0.0;
  double sup_lhs = 0.0, sup_rhs = 0.0, sup_ratio = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double lambda_alpha = 0.0;
  double max_m_ratio = 0.0;
  double max_sup_ratio = 0.0;
  bool pass = true;
  double first_failure = -1.0;  // time of the first ratio above 1 + tol
};

/// Runs both initial data and tracks ‖ψ(t) − ψ̃(t)‖ / (e^{λ_α t}‖ψ₀ − ψ̃₀‖)
/// in the ℳ^α and sup norms.
StabilityReport verify_stability(const RadialCharFn& psi0, const RadialCharFn& psi0_tilde,
                                 const SolverConfig& cfg, double tolerance);

/// Stability ratios of two existing trajectories with equal times.
StabilityReport stability_ratios(const Trajectory& a, const Trajectory& b, double alpha,
                                 double lambda_alpha, double tolerance);

struct ContinuityReport {
  double constant = 0.0;         // max of dis_{α,α} / (|t−s| e^{λ_α max} dis_{α,α}(φ₀, 1))
  double max_increment = 0.0;    // max dis_{α,α}(φ(t), φ(s))
  double initial_distance = 0.0;
  std::size_t pairs = 0;
  bool finite = true;
  std::vector<double> lipschitz;  // per consecutive pair: dis / |t − s|
};

ContinuityReport verify_continuity(const Trajectory& traj, double alpha, double lambda_alpha);

}  // namespace bobylev
