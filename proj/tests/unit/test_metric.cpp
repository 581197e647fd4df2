#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bobylev/errors.hpp"
#include "bobylev/metric.hpp"

using namespace bobylev;

namespace {
constexpr double kPi = std::numbers::pi;
const double kGaussM1 = 15.749609945722419744;
const double kChi3Mean = 1.5957691216057307118;
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Closed form of c_{α,d,∞}.
double c_closed(double a, int d) {
  return 0.5 * std::pow(kPi, d / 2.0) * std::abs(std::tgamma(-a / 2)) / (std::pow(2.0, a) * std::tgamma((d + a) / 2));
}
}  // namespace

TEST(SupNorm, Examples) {
  const auto one = CharFn::unit();
  EXPECT_EQ(sup_norm(one, one, 1.0).value, 0.0);
  EXPECT_NEAR(sup_norm(CharFn::gaussian(1.0), one, 2.0).value, 0.5, 1e-8);
  const DiscreteMeasure pair(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  EXPECT_NEAR(sup_norm(CharFn::discrete(pair), one, 2.0).value, 0.5, 1e-8);
  const auto s = sup_norm(CharFn::gaussian(1.0), one, 1.0);
  EXPECT_NEAR(s.value, 0.45125623407830819138, 1e-10);
  EXPECT_FALSE(s.divergent);
}

TEST(SupNorm, DivergenceWhenIndexTooLarge) {
  const auto s = sup_norm(CharFn::stable(0.5), CharFn::unit(), 1.0);
  EXPECT_TRUE(s.divergent);
}

TEST(MNorm, Examples) {
  const auto one = CharFn::unit();
  EXPECT_EQ(m_norm(one, one, 1.0).value, 0.0);
  const auto g = m_norm(CharFn::gaussian(1.0), one, 1.0);
  EXPECT_LT(rel(g.value, kGaussM1), 1e-6);
  EXPECT_LT(rel(g.estimate(), kGaussM1), 2e-7);
  EXPECT_FALSE(g.divergent);
  EXPECT_NEAR(g.tail_bound, 2 * 4 * kPi / 1e7, 1e-15);
  EXPECT_LT(rel(m_norm(CharFn::gaussian(1.0), one, 1.5).estimate(), 18.060392444576157792), 1e-6);
}

TEST(MNorm, LogarithmicDivergenceOfStableLaw) {
  const auto one = CharFn::unit();
  double x[3], y[3];
  const double eps[3] = {1e-2, 1e-3, 1e-4};
  for (int i = 0; i < 3; ++i) {
    IntegralOptions o;
    o.eps = eps[i];
    const auto r = m_norm(CharFn::stable(1.0), one, 1.0, o);
    EXPECT_TRUE(r.divergent);
    EXPECT_EQ(r.growth, "logarithmic");
    x[i] = std::log(1.0 / eps[i]);
    y[i] = r.value;
  }
  const double xm = (x[0] + x[1] + x[2]) / 3, ym = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  EXPECT_LT(rel(sxy / sxx, 4 * kPi), 0.05);
}

TEST(MNorm, AnisotropicDiscreteMatchesRadial) {
  // 1 − cos(v·ξ) >= 0, so the norm is 2 c_{α,3,∞} m_α; the part beyond R
  // lies between 0 and the tail bound.
  const DiscreteMeasure pair(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  for (double a : {0.5, 1.0, 1.5}) {
    const auto r = m_norm(CharFn::discrete(pair), CharFn::unit(), a);
    const double exact = 2 * c_closed(a, 3);
    EXPECT_LE(r.estimate(), exact * (1 + 1e-8)) << a;
    EXPECT_GE(r.estimate() + r.tail_bound, exact) << a;
    // the truncated part: the sphere average of 1 − cos tends to 1 beyond R
    EXPECT_LT(rel(r.estimate() + r.tail_bound / 2, exact), 2e-3) << a;
  }
}

TEST(DisAB, ExamplesAndSymmetry) {
  const auto one = CharFn::unit();
  EXPECT_EQ(dis_ab(one, one, 1.5, 1.0).value, 0.0);
  const auto d = dis_ab(CharFn::gaussian(1.0), one, 1.0, 1.0);
  EXPECT_LT(rel(d.value, kGaussM1 + 0.45125623407830819138), 1e-6);
  const CharFn fns[] = {CharFn::gaussian(1.0), CharFn::gaussian(1.7), CharFn::stable(1.5), CharFn::uniform_sphere(1.0),
                        CharFn::uniform_sphere(0.4)};
  for (const auto& a : fns)
    for (const auto& b : fns) EXPECT_NEAR(dis_ab(a, b, 1.2, 1.0).value, dis_ab(b, a, 1.2, 1.0).value, 1e-12);
}

TEST(DisAB, TriangleInequality) {
  const CharFn fns[] = {CharFn::gaussian(1.0), CharFn::gaussian(1.4), CharFn::stable(1.6), CharFn::uniform_sphere(1.0),
                        CharFn::uniform_sphere(0.5)};
  for (const auto& a : fns)
    for (const auto& b : fns)
      for (const auto& c : fns) {
        const double ab = dis_ab(a, b, 1.0, 1.0).value;
        const double bc = dis_ab(b, c, 1.0, 1.0).value;
        const double ac = dis_ab(a, c, 1.0, 1.0).value;
        EXPECT_LE(ac, ab + bc + 1e-6);
      }
}

TEST(CConstant, MatchesClosedForm) {
  for (double a : {0.3, 0.5, 1.0, 1.5, 1.9}) EXPECT_LT(rel(c_constant(a, 3), c_closed(a, 3)), 1e-9) << a;
  EXPECT_LT(rel(c_constant(1.0, 3), kPi * kPi / 2), 1e-9);
  EXPECT_LT(rel(c_constant(1.0, 1), kPi / 2), 1e-9);
  EXPECT_LT(rel(c_constant(1.0, 2), kPi), 1e-9);
  EXPECT_LT(rel(c_constant(1.5, 2), c_closed(1.5, 2)), 1e-9);
}

TEST(CConstant, TruncatedAndMonotone) {
  EXPECT_LT(rel(c_constant(1.0, 3, 1.0), 1.029991135286060441), 1e-9);
  EXPECT_LT(rel(c_constant(1.0, 3, 4.0), 3.2907934162358608973), 1e-9);
  EXPECT_LT(rel(c_constant(0.5, 3, 1.0), 0.68339610976245949304), 1e-9);
  EXPECT_LT(c_constant(1.0, 3, 1.0), c_constant(1.0, 3, 4.0));
  EXPECT_LT(c_constant(1.0, 3, 4.0), c_constant(1.0, 3));
}

TEST(CConstant, ConsistencyWithGaussianNorm) {
  const double lhs = 2 * c_constant(1.0, 3) * kChi3Mean;
  EXPECT_LT(rel(lhs, m_norm(CharFn::gaussian(1.0), CharFn::unit(), 1.0).estimate()), 1e-6);
}

TEST(CConstant, FixtureFileMatches) {
  const auto rows = read_c_fixtures(BOBYLEV_FIXTURES);
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_LT(rel(r.value, c_constant(r.alpha, r.dim, r.M)), 1e-12);
}

TEST(Moments, GaussianExactAndUpper) {
  EXPECT_LT(rel(moment_exact(CharFn::gaussian(1.0), 1.0).value, kChi3Mean), 1e-6);
  EXPECT_LT(rel(moment_upper(CharFn::gaussian(1.0), 1.0).value, kChi3Mean), 1e-4);
  EXPECT_GE(moment_upper(CharFn::gaussian(1.0), 1.0).value, kChi3Mean * (1 - 1e-9));
  EXPECT_LT(rel(moment_exact(CharFn::gaussian(1.0), 0.5).value, 1.2332684379936878285), 1e-6);
  EXPECT_EQ(moment_upper(CharFn::unit(), 1.0).value, moment_upper(CharFn::unit(), 1.0).tail_bound / (2 * c_constant(1.0, 3)));
}

TEST(Moments, DiscreteExact) {
  const DiscreteMeasure pair(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  EXPECT_LT(rel(moment_exact(CharFn::discrete(pair), 1.0).value, 1.0), 1e-6);
  const auto m = random_mean_zero_measure(7, 3, 5, 10.0);
  for (double a : {0.5, 1.0, 1.5})
    EXPECT_LT(rel(moment_exact(CharFn::discrete(m), a).value, m.moment(a)), 1e-4) << a;
}

TEST(Moments, DivergentForStableLaw) {
  EXPECT_TRUE(moment_exact(CharFn::stable(1.0), 1.0).divergent);
  EXPECT_TRUE(moment_upper(CharFn::stable(1.0), 1.5).divergent);
  EXPECT_FALSE(moment_exact(CharFn::stable(1.0), 0.5).divergent);
}

TEST(Moments, UpperBoundsDiscrete) {
  const auto m = random_mean_zero_measure(3, 3, 6, 5.0);
  const auto f = CharFn::discrete(m);
  EXPECT_GE(moment_upper(f, 0.5).value, m.moment(0.5));
}

TEST(TailMoment, Examples) {
  EXPECT_EQ(tail_moment_bound(CharFn::unit(), 1.0, 2.0), 0.0);
  const DiscreteMeasure pair(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  EXPECT_GE(tail_moment_bound(CharFn::discrete(pair), 1.0, 2.0), 0.0);
  const auto m = random_mean_zero_measure(5, 3, 5, 4.0);
  EXPECT_GE(tail_moment_bound(CharFn::discrete(m), 1.0, 0.5), m.tail_moment(1.0, 0.5));
}

TEST(Embedding, ProvenDirection) {
  const auto one = CharFn::unit();
  const auto e0 = embedding_check(one, 1.0, 1.5);
  EXPECT_EQ(e0.lhs, 0.0);
  EXPECT_EQ(e0.rhs, 0.0);
  const auto e = embedding_check(CharFn::gaussian(1.0), 1.0, 1.5);
  EXPECT_TRUE(std::isfinite(e.lhs));
  EXPECT_TRUE(std::isfinite(e.rhs));
  EXPECT_TRUE(e.holds);
}

TEST(Embedding, DegenerateAndInapplicable) {
  const auto s = embedding_check(CharFn::stable(1.0), 1.0, 1.0);
  EXPECT_TRUE(s.lhs_divergent);
  EXPECT_TRUE(s.degenerate);
  const auto g = embedding_check(CharFn::gaussian(1.0), 1.5, 1.0);
  EXPECT_TRUE(g.inapplicable);
  EXPECT_FALSE(g.holds);
}

TEST(Sandwich, SeededDiscreteMeasures) {
  const auto one = CharFn::unit();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_mean_zero_measure(seed, 3, 8, 10.0);
    const auto f = CharFn::discrete(m);
    for (double a : {0.5, 1.0, 1.5}) {
      const auto k = sandwich_constants(a, 3);
      const double sup = sup_norm(f, one, a).value;
      const double mom = moment_exact(f, a).value;
      const double up = moment_upper(f, a).value;
      EXPECT_LE(sup, k.C1 * mom * (1 + 1e-9)) << "seed " << seed << " alpha " << a << " sup " << sup << " mom " << mom;
      EXPECT_LE(mom, up * (1 + 1e-6)) << "seed " << seed << " alpha " << a << " up " << up << " mom " << mom;
      EXPECT_LE(k.C1 * mom, k.C2 * (2 * c_constant(a, 3)) * up * (1 + 1e-6));
    }
  }
}

TEST(Sandwich, TaylorConstants) {
  EXPECT_NEAR(taylor_constant(1.0), 1.0, 1e-12);
  EXPECT_NEAR(taylor_constant(2.0), 0.5, 1e-12);
  EXPECT_GT(taylor_constant(0.5), 1.0);
}

TEST(WeakConvergence, TestFunctionAveragesConverge) {
  // Atoms of φ_n approach those of φ; dis_{α,α} and the averages of
  // ⟨v⟩^α cos(v_1) both converge.
  const double alpha = 1.0;
  const auto target = DiscreteMeasure(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  const auto test_fn = [&](const DiscreteMeasure& m) {
    double s = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& v = m.points()[i];
      s += m.weights()[i] * std::pow(1 + dot(v, v), alpha / 2) * std::cos(v[0]);
    }
    return s;
  };
  double prev_d = 1e300, prev_gap = 1e300;
  for (double h : {0.4, 0.2, 0.1, 0.05}) {
    const auto mh = DiscreteMeasure(3, {{1 + h, 0, 0}, {-1 - h, 0, 0}}, {0.5, 0.5});
    const double d = dis_ab(CharFn::discrete(mh), CharFn::discrete(target), alpha, alpha).value;
    const double gap = std::abs(test_fn(mh) - test_fn(target));
    EXPECT_LT(d, prev_d);
    EXPECT_LT(gap, prev_gap);
    prev_d = d;
    prev_gap = gap;
  }
}
