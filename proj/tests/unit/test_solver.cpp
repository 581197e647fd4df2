#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <omp.h>

#include "bobylev/charfun.hpp"
#include "bobylev/collision.hpp"
#include "bobylev/errors.hpp"
#include "bobylev/solver.hpp"

using namespace bobylev;

namespace {
constexpr double kPi = std::numbers::pi;

std::shared_ptr<const RadialGrid> grid512() {
  static const auto g = RadialGrid::make({});
  return g;
}

std::size_t node_at(const RadialGrid& g, double r) {
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(g[i] - r) < 1e-12) return i;
  throw std::runtime_error("radius is not a grid node");
}

double max_deviation(const Trajectory& tr, const RadialCharFn& ref) {
  double m = 0.0;
  for (const auto& s : tr.snapshots)
    for (std::size_t i = 0; i < s.size(); ++i) m = std::max(m, std::abs(s[i] - ref[i]));
  return m;
}

SolverConfig cutoff_config(double T, double dt) {
  SolverConfig c;
  c.kernel = KernelSpec::constant(1.0);
  c.T = T;
  c.dt = dt;
  return c;
}

SolverConfig singular_config(double T, double dt) {
  SolverConfig c;
  c.kernel = KernelSpec::singular(0.25);
  c.T = T;
  c.dt = dt;
  c.integrator = Integrator::exponential_euler;
  return c;
}
}  // namespace

TEST(CollisionGain, UnitDatumGivesGamma2) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  const auto g = collision_gain(one, KernelSpec::constant(1.0), make_quadrature({}));
  for (double v : g) EXPECT_NEAR(v, 2.0 * kPi, 1e-12);
}

TEST(CollisionGain, GaussianProductIdentity) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto g = collision_gain(psi, KernelSpec::constant(1.0), make_quadrature({}));
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], 2.0 * kPi * psi[i], 1e-8);
}

TEST(CollisionGain, StableProfileMatchesReference) {
  const auto psi = sample_radial(CharFn::stable(1.0), grid512());
  const auto g = collision_gain(psi, KernelSpec::constant(1.0), make_quadrature({}));
  EXPECT_NEAR(g[node_at(*grid512(), 1.0)], 1.6627918685484997172, 1e-8);
}

TEST(CollisionGain, RejectsUnboundedKernel) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  EXPECT_THROW(collision_gain(one, KernelSpec::singular(0.25), make_quadrature({})), DomainError);
}

TEST(RhsNoncutoff, UnitDatumIsExactlyStationary) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  const auto r = rhs_noncutoff(one, KernelSpec::singular(0.25), make_quadrature({}));
  for (double v : r) EXPECT_EQ(v, 0.0);
}

TEST(RhsNoncutoff, GaussianIsStationaryUnderSingularKernel) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto r = rhs_noncutoff(psi, KernelSpec::singular(0.25), make_quadrature({}));
  for (double v : r) EXPECT_LE(std::abs(v), 1e-7);
}

TEST(RhsNoncutoff, StableProfileMatchesReferenceAndPanelsDecay) {
  const auto psi = sample_radial(CharFn::stable(1.0), grid512());
  const KernelSpec k = KernelSpec::singular(0.25);
  const auto quad = make_quadrature({});
  const auto r = rhs_noncutoff(psi, k, quad);
  const std::size_t i = node_at(*grid512(), 1.0);
  EXPECT_NEAR(r[i], -12.585656707154961742, 1e-5 * 12.585656707154961742);

  const CollisionOperator op(k, grid512(), quad);
  const auto panels = op.panel_contributions(psi, i);
  const auto& q = op.quad();
  const std::size_t P = panels.size();
  auto first = [&](std::size_t k) { return q.nodes()[q.panel_begin(P - 1 - k)]; };
  auto last = [&](std::size_t k) { return q.nodes()[q.panel_begin(P - k) - 1]; };
  // on self-similar halving panels the contributions shrink by 2^{-(1-2s)}
  int checked = 0;
  for (std::size_t k = 1; k < P; ++k) {
    if (std::abs(first(k) / first(k - 1) - 0.5) > 1e-3 ||
        std::abs(last(k) / last(k - 1) - 0.5) > 1e-3)
      continue;
    EXPECT_LT(std::abs(panels[k]), std::abs(panels[k - 1]));
    EXPECT_NEAR(panels[k] / panels[k - 1], std::pow(0.5, 0.5), 0.03);
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(RhsNoncutoff, RoughDataAreRejected) {
  const auto psi = sample_radial(CharFn::stable(0.4), grid512());
  EXPECT_THROW(rhs_noncutoff(psi, KernelSpec::singular(0.25), make_quadrature({})), DivergenceError);
}

TEST(RhsMnormBound, UnitDatumGivesZero) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  const auto b = rhs_mnorm_bound(one, KernelSpec::singular(0.25), 1.0, make_quadrature({}));
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_FALSE(b.divergent);
}

TEST(RhsMnormBound, GaussianIsStationary) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto b = rhs_mnorm_bound(psi, KernelSpec::singular(0.25), 1.0, make_quadrature({}));
  EXPECT_LE(b.lhs, 5e-6);
}

TEST(RhsMnormBound, ScalesLinearlyInTheDeviation) {
  const auto psi = sample_radial(CharFn::stable(1.5), grid512());
  auto scaled = [&](double eps) {
    std::vector<double> u(psi.deviations().begin(), psi.deviations().end());
    for (double& v : u) v *= eps;
    return RadialCharFn::from_deviation(grid512(), u);
  };
  const auto quad = make_quadrature({});
  const auto k = KernelSpec::singular(0.25);
  const auto full = rhs_mnorm_bound(psi, k, 1.0, quad);
  EXPECT_TRUE(std::isfinite(full.lhs));
  EXPECT_GT(full.lhs, 0.0);
  const auto b1 = rhs_mnorm_bound(scaled(1e-3), k, 1.0, quad);
  const auto b2 = rhs_mnorm_bound(scaled(2e-3), k, 1.0, quad);
  EXPECT_NEAR(b2.lhs / b1.lhs, 2.0, 0.2);
  EXPECT_NEAR(b2.scale / b1.scale, 2.0, 0.2);
}

TEST(Duhamel, UnitDatumIsAnExactFixedPoint) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  const auto tr = duhamel_evolve(one, cutoff_config(1.0, 0.05));
  ASSERT_EQ(tr.snapshots.size(), 21u);
  for (const auto& s : tr.snapshots)
    for (double v : s.values()) EXPECT_EQ(v, 1.0);
}

TEST(Duhamel, GaussianStaysStationary) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto tr = duhamel_evolve(psi, cutoff_config(1.0, 0.05));
  EXPECT_LE(max_deviation(tr, psi), 1e-6);
}

TEST(Duhamel, SphereConservesMassAndModulusAndContracts) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  auto cfg = cutoff_config(0.5, 0.05);
  const auto tr = duhamel_evolve(psi, cfg);
  for (const auto& d : tr.diagnostics) {
    EXPECT_NEAR(d.mass, 1.0, 1e-12);
    EXPECT_LE(d.max_modulus, 1.0 + 1e-10);
    EXPECT_LE(d.m_norm, std::exp(tr.lambda_alpha * d.t) * tr.diagnostics[0].m_norm * (1.0 + 1e-6));
  }
  for (const auto& s : tr.steps) {
    EXPECT_GT(s.contraction, 0.0);
    EXPECT_LE(s.contraction, s.bound);
  }
}

TEST(Duhamel, ContractionGuardIsEnforced) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  EXPECT_THROW(duhamel_evolve(psi, cutoff_config(1.0, 0.5)), ConfigError);
  auto cfg = cutoff_config(1.0, 0.05);
  cfg.kernel = KernelSpec::singular(0.25);
  EXPECT_THROW(duhamel_evolve(psi, cfg), ConfigError);
}

TEST(Duhamel, PicardBudgetExhaustionReportsFactor) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  auto cfg = cutoff_config(0.05, 0.05);
  cfg.picard_max_iter = 2;
  try {
    (void)duhamel_evolve(psi, cfg);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("contraction factor"), std::string::npos);
  }
}

TEST(Noncutoff, GaussianStaysStationary) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto tr = evolve_noncutoff(psi, singular_config(0.5, 0.01));
  EXPECT_LE(max_deviation(tr, psi), 5e-6);
}

TEST(Noncutoff, SphereObeysBothEnvelopes) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  const auto tr = evolve_noncutoff(psi, singular_config(0.5, 0.01));
  const auto& d0 = tr.diagnostics.front();
  for (const auto& d : tr.diagnostics) {
    const double env = std::exp(tr.lambda_alpha * d.t);
    EXPECT_NEAR(d.mass, 1.0, 1e-12);
    EXPECT_LE(d.max_modulus, 1.0 + 1e-10);
    EXPECT_LE(d.sup_norm, env * d0.sup_norm);
    EXPECT_LE(d.m_norm, env * d0.m_norm);
  }
}

TEST(Noncutoff, StableDataObeyMEstimate) {
  const auto psi = sample_radial(CharFn::stable(1.5), grid512());
  const auto tr = evolve_noncutoff(psi, singular_config(0.5, 0.01));
  const auto& d0 = tr.diagnostics.front();
  for (const auto& d : tr.diagnostics)
    EXPECT_LE(d.m_norm, std::exp(tr.lambda_alpha * d.t) * d0.m_norm);
}

TEST(Noncutoff, RoughInitialDataAreRejected) {
  const auto psi = sample_radial(CharFn::stable(0.4), grid512());
  EXPECT_THROW(evolve_noncutoff(psi, singular_config(0.1, 0.01)), DivergenceError);
}

TEST(CutoffStudy, BoundedKernelGivesZeroDistances) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  auto cfg = cutoff_config(0.1, 0.05);
  cfg.diagnostics = false;
  const auto st = cutoff_sequence_study(psi, cfg, {2.0, 8.0}, false);
  EXPECT_EQ(st.distances[0][1], 0.0);
}

TEST(Stability, IdenticalDataPass) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto rep = verify_stability(psi, psi, cutoff_config(0.2, 0.05), 0.02);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_m_ratio, 0.0);
  EXPECT_EQ(rep.max_sup_ratio, 0.0);
}

TEST(Stability, GaussianPairUnderConstantKernel) {
  const auto a = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto b = sample_radial(CharFn::gaussian(1.1), grid512());
  const auto rep = verify_stability(a, b, cutoff_config(1.0, 0.05), 0.02);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.max_m_ratio, 1.02);
  EXPECT_LE(rep.max_sup_ratio, 1.02);
}

TEST(Continuity, ConstantTrajectoryHasZeroIncrements) {
  const auto one = sample_radial(CharFn::unit(), grid512());
  const auto tr = duhamel_evolve(one, cutoff_config(0.2, 0.05));
  const auto rep = verify_continuity(tr, 1.0, tr.lambda_alpha);
  EXPECT_EQ(rep.max_increment, 0.0);
  EXPECT_EQ(rep.constant, 0.0);
}

TEST(Continuity, GaussianIncrementsAreAtIntegratorLevel) {
  const auto psi = sample_radial(CharFn::gaussian(1.0), grid512());
  const auto tr = duhamel_evolve(psi, cutoff_config(0.2, 0.05));
  const auto rep = verify_continuity(tr, 1.0, tr.lambda_alpha);
  EXPECT_LE(rep.max_increment, 1e-6);
}

TEST(Continuity, SphereRunHasFiniteLipschitzRatio) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  const auto tr = evolve_noncutoff(psi, singular_config(0.1, 0.01));
  const auto rep = verify_continuity(tr, 1.0, tr.lambda_alpha);
  EXPECT_TRUE(rep.finite);
  EXPECT_GT(rep.constant, 0.0);
  EXPECT_EQ(rep.pairs, 55u);
}

TEST(Determinism, ThreadCountDoesNotChangeTrajectories) {
  const auto psi = sample_radial(CharFn::uniform_sphere(1.0), grid512());
  auto cfg = singular_config(0.05, 0.01);
  cfg.diagnostics = false;
  omp_set_num_threads(1);
  const auto a = evolve_noncutoff(psi, cfg);
  omp_set_num_threads(4);
  const auto b = evolve_noncutoff(psi, cfg);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k)
    for (std::size_t i = 0; i < psi.size(); ++i) EXPECT_EQ(a.snapshots[k][i], b.snapshots[k][i]);
}
