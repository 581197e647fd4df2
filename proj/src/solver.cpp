#include "bobylev/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "bobylev/charfun.hpp"
#include "bobylev/errors.hpp"

namespace bobylev {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Interpolation mode and origin exponent of the initial datum; the flow
// preserves the exponent, so it is not refitted on every state.
struct Shape {
  Interpolation mode;
  double holder;
};

RadialCharFn state_of(std::shared_ptr<const RadialGrid> grid, std::vector<double> u,
                      const Shape& shape) {
  return RadialCharFn::from_deviation(std::move(grid), std::move(u), shape.mode, shape.holder);
}

// φ₁(z) = (e^z − 1)/z and φ₂(z) = (e^z − 1 − z)/z², by series near 0.
double phi1(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-2) {
    double term = 0.5, sum = 0.5;
    for (int k = 3; k < 10; ++k) {
      term *= z / k;
      sum += term;
    }
    return sum;
  }
  return (std::expm1(z) - z) / (z * z);
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// max_{i>0} |a_i − b_i| / r_i^α
double weighted_diff(const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& weight) {
  double m = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) * weight[i]);
  return m;
}

struct RunSetup {
  std::shared_ptr<const RadialGrid> grid;
  AngularQuadrature quad;
  int steps = 0;
  double dt = 0.0;
};

RunSetup setup(const RadialCharFn& psi0, const SolverConfig& cfg) {
  cfg.validate();
  const auto& g = psi0.grid().spec();
  if (g.intervals != cfg.grid.intervals || g.r_max != cfg.grid.r_max || g.r_lin != cfg.grid.r_lin)
    throw ConfigError("solver: initial datum is sampled on a different grid than configured");
  RunSetup s;
  s.grid = psi0.grid_ptr();
  s.quad = make_quadrature(cfg.quad);
  s.steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
  if (std::abs(s.steps * cfg.dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
    s.steps = static_cast<int>(std::ceil(cfg.T / cfg.dt));
  s.dt = s.steps > 0 ? cfg.T / s.steps : cfg.dt;
  return s;
}

void fill_constants(Trajectory& traj, const SolverConfig& cfg, const AngularQuadrature& quad) {
  const auto ga = gamma_alpha(cfg.kernel, cfg.alpha, quad);
  const auto la = lambda_alpha(cfg.kernel, cfg.alpha, quad);
  traj.gamma_alpha = ga.value;
  traj.lambda_alpha = la.value;
}

void record(Trajectory& traj, const SolverConfig& cfg, RadialCharFn psi, double t) {
  if (cfg.diagnostics) traj.diagnostics.push_back(diagnose(psi, t, cfg.alpha));
  traj.times.push_back(t);
  traj.snapshots.push_back(std::move(psi));
}

// One Duhamel step on m τ-intervals. U holds the initial iterate on entry
// (U[0] = u_n) and the fixed point on exit.
struct PicardOutcome {
  int iterations = 0;
  double contraction = 0.0;
};

PicardOutcome picard_solve(const CollisionOperator& op, std::vector<std::vector<double>>& U,
                           double dt, const SolverConfig& cfg,
                           const std::vector<double>& weight, const Shape& shape) {
  const auto grid = op.grid_ptr();
  const int m = static_cast<int>(U.size()) - 1;
  const double h = dt / m;
  const double g2 = op.gamma2();
  const double z = -g2 * h;
  const double decay = std::exp(z);
  const double wb = h * phi2(z);
  const double wa = h * phi1(z) - wb;
  const std::size_t M = U[0].size();

  std::vector<std::vector<double>> H(m + 1);
  H[0] = op.gain_deviation(state_of(grid, U[0], shape));
  PicardOutcome out;
  double prev_weighted = 0.0;
  for (int it = 1; it <= cfg.picard_max_iter; ++it) {
    for (int k = 1; k <= m; ++k) H[k] = op.gain_deviation(state_of(grid, U[k], shape));
    double change = 0.0, weighted = 0.0;
    std::vector<double> next(M);
    for (int k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < M; ++i)
        next[i] = decay * U[k][i] + wa * H[k][i] + wb * H[k + 1][i];
      // the recursion in k evaluates the Duhamel integral of the old H
      change = std::max(change, sup_abs_diff(next, U[k + 1]));
      weighted = std::max(weighted, weighted_diff(next, U[k + 1], weight));
      U[k + 1] = next;
    }
    out.iterations = it;
    // ratios are only meaningful well above rounding noise
    if (it > 1 && prev_weighted > 0.0 && change > 1e-9)
      out.contraction = std::max(out.contraction, weighted / prev_weighted);
    prev_weighted = weighted;
    if (change < cfg.picard_tol) return out;
  }
  throw ConvergenceError(fmt::format(
      "Picard iteration: no convergence in {} iterations (measured contraction factor {})",
      cfg.picard_max_iter, out.contraction));
}
}  // namespace

std::string to_string(Integrator integrator) {
  return integrator == Integrator::duhamel_picard ? "duhamel_picard" : "exponential_euler";
}

void SolverConfig::validate() const {
  kernel.validate();
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError(fmt::format("solver: alpha must lie in (0, 2], got {}", alpha));
  if (!(T >= 0.0 && std::isfinite(T))) throw ConfigError(fmt::format("solver: T must be non-negative, got {}", T));
  if (!(dt > 0.0 && std::isfinite(dt))) throw ConfigError(fmt::format("solver: dt must be positive, got {}", dt));
  if (!(picard_tol > 0.0)) throw ConfigError("solver: picard_tol must be positive");
  if (picard_max_iter < 1) throw ConfigError("solver: picard_max_iter must be at least 1");
  if (!(time_tol > 0.0)) throw ConfigError("solver: time_tol must be positive");
  if (max_tau_intervals < 2) throw ConfigError("solver: max_tau_intervals must be at least 2");
  if (snapshot_every < 1) throw ConfigError("solver: snapshot_every must be at least 1");
  if (grid.intervals < 8) throw ConfigError("solver: grid needs at least 8 intervals");
  if (!(grid.r_max > grid.r_lin && grid.r_lin > 0.0)) throw ConfigError("solver: need 0 < r_lin < r_max");
}

Diagnostics diagnose(const RadialCharFn& psi, double t, double alpha) {
  Diagnostics d;
  d.t = t;
  d.mass = psi[0];
  d.max_modulus = psi.max_modulus();
  const CharFn f = CharFn::radial_grid(psi);
  const CharFn one = CharFn::unit();
  d.sup_norm = sup_norm(f, one, alpha).value;
  if (alpha >= 2.0) {
    // ℳ^2 is not defined
    d.m_norm = d.moment_upper = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  const auto mn = m_norm(f, one, alpha);
  d.m_norm = mn.divergent ? kInf : mn.estimate();
  const auto mu = moment_upper(f, alpha);
  d.moment_upper = mu.divergent ? kInf : mu.value;
  return d;
}

Trajectory duhamel_evolve(const RadialCharFn& psi0, const SolverConfig& cfg) {
  const RunSetup s = setup(psi0, cfg);
  const Shape shape{psi0.interpolation(), psi0.holder_exponent()};
  if (!cfg.kernel.bounded())
    throw ConfigError("duhamel_evolve: the kernel must be bounded (set a cutoff)");
  const CollisionOperator op(cfg.kernel, s.grid, s.quad);
  Trajectory traj;
  fill_constants(traj, cfg, s.quad);
  traj.gamma2 = op.gamma2();
  const double bound = traj.gamma_alpha * s.dt;
  if (!(bound < 1.0))
    throw ConfigError(fmt::format("duhamel_evolve: contraction guard violated, γ_α Δt = {} >= 1", bound));

  const auto r = s.grid->radii();
  std::vector<double> weight(r.size(), 0.0);
  for (std::size_t i = 1; i < r.size(); ++i) weight[i] = std::pow(r[i], -cfg.alpha);

  std::vector<double> u(psi0.deviations().begin(), psi0.deviations().end());
  record(traj, cfg, state_of(s.grid, u, shape), 0.0);
  for (int n = 0; n < s.steps; ++n) {
    // first-order exponential predictor as the initial iterate
    const auto H0 = op.gain_deviation(state_of(s.grid, u, shape));
    auto predictor = [&](int m) {
      std::vector<std::vector<double>> U(m + 1, u);
      for (int k = 1; k <= m; ++k) {
        const double tau = s.dt * k / m;
        const double z = -op.gamma2() * tau;
        const double e = std::exp(z), w = tau * phi1(z);
        for (std::size_t i = 0; i < u.size(); ++i) U[k][i] = e * u[i] + w * H0[i];
      }
      return U;
    };
    int m = 2;
    auto U = predictor(m);
    StepReport rep;
    rep.bound = bound;
    auto res = picard_solve(op, U, s.dt, cfg, weight, shape);
    rep.contraction = res.contraction;
    for (;;) {
      const int m2 = 2 * m;
      std::vector<std::vector<double>> V(m2 + 1);
      for (int k = 0; k <= m; ++k) V[2 * k] = U[k];
      for (int k = 0; k < m; ++k) {
        V[2 * k + 1].resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) V[2 * k + 1][i] = 0.5 * (U[k][i] + U[k + 1][i]);
      }
      auto res2 = picard_solve(op, V, s.dt, cfg, weight, shape);
      rep.contraction = std::max(rep.contraction, res2.contraction);
      const double diff = sup_abs_diff(V.back(), U.back());
      U = std::move(V);
      m = m2;
      res = res2;
      if (diff < cfg.time_tol) break;
      if (m >= cfg.max_tau_intervals)
        throw AccuracyError(fmt::format(
            "duhamel_evolve: τ-refinement did not settle at t = {} (change {} with {} intervals)",
            (n + 1) * s.dt, diff, m));
    }
    u = U.back();
    rep.t = (n + 1) * s.dt;
    rep.iterations = res.iterations;
    rep.tau_intervals = m;
    traj.steps.push_back(rep);
    if ((n + 1) % cfg.snapshot_every == 0 || n + 1 == s.steps)
      record(traj, cfg, state_of(s.grid, u, shape), rep.t);
  }
  return traj;
}

Trajectory evolve_noncutoff(const RadialCharFn& psi0, const SolverConfig& cfg) {
  const RunSetup s = setup(psi0, cfg);
  const Shape shape{psi0.interpolation(), psi0.holder_exponent()};
  if (!cfg.kernel.bounded() && !(psi0.holder_exponent() > 2.0 * cfg.kernel.s))
    throw DivergenceError(fmt::format(
        "evolve_noncutoff: Hölder exponent {} of the initial datum at 0 does not exceed 2s = {}",
        psi0.holder_exponent(), 2.0 * cfg.kernel.s));
  const CollisionOperator op(cfg.kernel, s.grid, s.quad);
  Trajectory traj;
  fill_constants(traj, cfg, s.quad);
  traj.gamma2 = op.gamma2();
  check_panel_decay(op, psi0);

  const std::size_t M = s.grid->size();
  auto exp_step = [&](const std::vector<double>& u0, double h) {
    const auto psi = state_of(s.grid, u0, shape);
    const auto F0 = op.rate(psi);
    const auto D = op.frozen_decay(psi);
    std::vector<double> N0(M), a(M), e(M), p1(M), p2(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double z = -h * D[i];
      e[i] = std::exp(z);
      p1[i] = h * phi1(z);
      p2[i] = h * phi2(z);
      N0[i] = F0[i] + D[i] * u0[i];
      a[i] = e[i] * u0[i] + p1[i] * N0[i];
    }
    const auto Fa = op.rate(state_of(s.grid, a, shape));
    std::vector<double> out(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double Na = Fa[i] + D[i] * a[i];
      out[i] = a[i] + p2[i] * (Na - N0[i]);
    }
    return out;
  };
  auto modulus_ok = [](const std::vector<double>& u) {
    for (double v : u)
      if (std::abs(1.0 - v) > 1.0 + 1e-10 || !std::isfinite(v)) return false;
    return true;
  };

  std::vector<double> u(psi0.deviations().begin(), psi0.deviations().end());
  record(traj, cfg, state_of(s.grid, u, shape), 0.0);
  int substeps = 1;
  for (int n = 0; n < s.steps; ++n) {
    for (;;) {
      const double h = s.dt / substeps;
      std::vector<double> v = u;
      bool ok = true;
      for (int k = 0; k < substeps && ok; ++k) {
        v = exp_step(v, h);
        ok = modulus_ok(v);
      }
      if (ok) {
        u = std::move(v);
        break;
      }
      if (substeps >= 1024)
        throw StepSizeError(fmt::format(
            "evolve_noncutoff: |ψ| exceeded 1 at t = {} even with {} substeps of {}", n * s.dt,
            substeps, h));
      substeps *= 2;
    }
    StepReport rep;
    rep.t = (n + 1) * s.dt;
    rep.substeps = substeps;
    traj.steps.push_back(rep);
    if ((n + 1) % cfg.snapshot_every == 0 || n + 1 == s.steps)
      record(traj, cfg, state_of(s.grid, u, shape), rep.t);
  }
  return traj;
}

Trajectory evolve(const RadialCharFn& psi0, const SolverConfig& cfg) {
  return cfg.integrator == Integrator::duhamel_picard ? duhamel_evolve(psi0, cfg)
                                                      : evolve_noncutoff(psi0, cfg);
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  std::size_t common = 0;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    for (std::size_t j = 0; j < b.times.size(); ++j) {
      if (std::abs(a.times[i] - b.times[j]) > 1e-9 * std::max(1.0, a.times[i])) continue;
      const auto va = a.snapshots[i].values();
      const auto vb = b.snapshots[j].values();
      if (va.size() != vb.size()) throw DomainError("trajectory distance: grids differ");
      for (std::size_t k = 0; k < va.size(); ++k) d = std::max(d, std::abs(va[k] - vb[k]));
      ++common;
      break;
    }
  }
  if (common == 0) throw DomainError("trajectory distance: no common snapshot times");
  return d;
}

CutoffStudy cutoff_sequence_study(const RadialCharFn& psi0, const SolverConfig& base,
                                  const std::vector<double>& cutoffs, bool with_direct) {
  if (cutoffs.empty()) throw ConfigError("cutoff study: empty cutoff list");
  CutoffStudy out;
  out.cutoffs = cutoffs;
  std::sort(out.cutoffs.begin(), out.cutoffs.end());
  const auto quad = make_quadrature(base.quad);
  const double g_max =
      gamma_alpha(base.kernel.with_cutoff(out.cutoffs.back()), base.alpha, quad).value;
  const int steps = std::max(1, static_cast<int>(std::ceil(base.T * 2.0 * g_max - 1e-9)));
  out.dt = std::min(base.dt, base.T / steps);
  if (base.T > 0.0) out.dt = base.T / std::ceil(base.T / out.dt - 1e-9);

  for (double n : out.cutoffs) {
    SolverConfig cfg = base;
    cfg.kernel = base.kernel.with_cutoff(n);
    cfg.dt = out.dt;
    cfg.integrator = Integrator::duhamel_picard;
    out.runs.push_back(duhamel_evolve(psi0, cfg));
  }
  const std::size_t k = out.runs.size();
  out.distances.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      out.distances[i][j] = out.distances[j][i] = trajectory_distance(out.runs[i], out.runs[j]);
  for (std::size_t i = 0; i + 1 < k; ++i) out.successive.push_back(out.distances[i][i + 1]);
  out.monotone = true;
  for (std::size_t i = 0; i + 1 < out.successive.size(); ++i)
    if (!(out.successive[i + 1] < out.successive[i])) out.monotone = false;

  if (with_direct) {
    SolverConfig cfg = base;
    cfg.dt = out.dt;
    cfg.integrator = Integrator::exponential_euler;
    const auto direct = evolve_noncutoff(psi0, cfg);
    cfg.dt = out.dt / 2.0;
    const auto half = evolve_noncutoff(psi0, cfg);
    out.has_direct = true;
    out.direct_distance = trajectory_distance(out.runs.back(), direct);
    out.integrator_tolerance = trajectory_distance(direct, half);
    out.direct_agrees = out.direct_distance <= 10.0 * out.integrator_tolerance;
  }
  return out;
}

StabilityReport stability_ratios(const Trajectory& a, const Trajectory& b, double alpha,
                                 double lambda_alpha, double tolerance) {
  if (a.times.size() != b.times.size()) throw DomainError("stability: snapshot counts differ");
  StabilityReport rep;
  rep.lambda_alpha = lambda_alpha;
  auto ratio = [](double lhs, double rhs) {
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : kInf;
    return lhs / rhs;
  };
  double m0 = 0.0, s0 = 0.0;
  for (std::size_t k = 0; k < a.times.size(); ++k) {
    const CharFn fa = CharFn::radial_grid(a.snapshots[k]);
    const CharFn fb = CharFn::radial_grid(b.snapshots[k]);
    const auto mn = m_norm(fa, fb, alpha);
    const double m = mn.divergent ? kInf : mn.estimate();
    const double sp = sup_norm(fa, fb, alpha).value;
    if (k == 0) {
      m0 = m;
      s0 = sp;
    }
    StabilityRow row;
    row.t = a.times[k];
    const double env = std::exp(lambda_alpha * row.t);
    row.m_lhs = m;
    row.m_rhs = env * m0;
    row.m_ratio = ratio(row.m_lhs, row.m_rhs);
    row.sup_lhs = sp;
    row.sup_rhs = env * s0;
    row.sup_ratio = ratio(row.sup_lhs, row.sup_rhs);
    rep.max_m_ratio = std::max(rep.max_m_ratio, row.m_ratio);
    rep.max_sup_ratio = std::max(rep.max_sup_ratio, row.sup_ratio);
    if ((row.m_ratio > 1.0 + tolerance || row.sup_ratio > 1.0 + tolerance) && rep.pass) {
      rep.pass = false;
      rep.first_failure = row.t;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

StabilityReport verify_stability(const RadialCharFn& psi0, const RadialCharFn& psi0_tilde,
                                 const SolverConfig& cfg, double tolerance) {
  const auto a = evolve(psi0, cfg);
  const auto b = evolve(psi0_tilde, cfg);
  return stability_ratios(a, b, cfg.alpha, a.lambda_alpha, tolerance);
}

ContinuityReport verify_continuity(const Trajectory& traj, double alpha, double lambda_alpha) {
  if (traj.snapshots.size() < 3) throw DomainError("continuity: need at least 3 snapshots");
  ContinuityReport rep;
  const std::size_t n = traj.snapshots.size();
  std::vector<CharFn> f;
  f.reserve(n);
  for (const auto& s : traj.snapshots) f.push_back(CharFn::radial_grid(s));
  auto dis = [&](const CharFn& a, const CharFn& b) {
    const auto d = dis_ab(a, b, alpha, alpha);
    return d.divergent ? kInf : d.value;
  };
  rep.initial_distance = dis(f[0], CharFn::unit());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dis(f[i], f[j]);
      const double dt = traj.times[j] - traj.times[i];
      rep.max_increment = std::max(rep.max_increment, d);
      const double unit = dt * std::exp(lambda_alpha * traj.times[j]) * rep.initial_distance;
      const double c = unit > 0.0 ? d / unit : (d == 0.0 ? 0.0 : kInf);
      rep.constant = std::max(rep.constant, c);
      if (j == i + 1) rep.lipschitz.push_back(d / dt);
      ++rep.pairs;
    }
  }
  rep.finite = std::isfinite(rep.constant);
  return rep;
}

}  // namespace bobylev
