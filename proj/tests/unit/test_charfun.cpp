#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "bobylev/charfun.hpp"
#include "bobylev/errors.hpp"

using namespace bobylev;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<std::pair<Point, Point>> random_pairs(std::uint64_t seed, int n, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<std::pair<Point, Point>> out;
  for (int i = 0; i < n; ++i) out.push_back({{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}});
  return out;
}

std::vector<Point> random_points(std::uint64_t seed, int n, double scale, int dim = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Point> out;
  for (int i = 0; i < n; ++i) {
    Point p{0, 0, 0};
    for (int j = 0; j < dim; ++j) p[j] = u(rng);
    out.push_back(p);
  }
  return out;
}
}  // namespace

TEST(Eval, Examples) {
  EXPECT_EQ(CharFn::gaussian(1.0).eval({0, 0, 0}), std::complex<double>(1.0, 0.0));
  const DiscreteMeasure pair(3, {{1, 0, 0}, {-1, 0, 0}}, {0.5, 0.5});
  EXPECT_NEAR(CharFn::discrete(pair).eval({kPi, 0, 0}).real(), -1.0, 1e-15);
  EXPECT_NEAR(CharFn::uniform_sphere(1.0).radial(kPi), 0.0, 1e-15);
  EXPECT_EQ(CharFn::uniform_sphere(1.0).radial(0.0), 1.0);
}

TEST(Eval, ModulusBoundedByOne) {
  const auto m = random_mean_zero_measure(11, 3, 8, 10.0);
  const CharFn fns[] = {CharFn::gaussian(1.3), CharFn::stable(0.7), CharFn::uniform_sphere(2.0),
                        CharFn::discrete(m), CharFn::unit()};
  for (const auto& f : fns)
    for (const auto& p : random_points(3, 200, 20.0)) EXPECT_LE(std::abs(f.eval(p)), 1.0 + 1e-12);
}

TEST(Eval, GridVariantOutOfRange) {
  const auto g = RadialGrid::make({});
  const auto f = CharFn::radial_grid(sample_radial(CharFn::gaussian(1.0), g));
  EXPECT_THROW((void)f.eval({65.0, 0, 0}), RangeError);
  EXPECT_NEAR(f.eval({0.7, 0.2, 0.1}).real(), std::exp(-0.5 * 0.54), 1e-8);
}

TEST(SampleRadial, Examples) {
  const auto g = RadialGrid::from_radii({0, 1, 2, 3, 4, 5});
  const auto psi = sample_radial(CharFn::gaussian(1.0), g);
  EXPECT_EQ(psi[0], 1.0);
  EXPECT_NEAR(psi[1], 0.60653065971263342, 1e-15);
  EXPECT_NEAR(psi[2], 0.1353352832366127, 1e-15);
  EXPECT_NEAR(sample_radial(CharFn::stable(0.5), g)[4], std::exp(-2.0), 1e-15);
  EXPECT_NEAR(CharFn::uniform_sphere(1.0).radial(kPi / 2), 2.0 / kPi, 1e-15);
}

TEST(SampleRadial, RejectsAnisotropic) {
  const auto m = random_mean_zero_measure(5, 3, 6, 4.0);
  EXPECT_THROW(sample_radial(CharFn::discrete(m), RadialGrid::make({})), VariantError);
}

TEST(RadialGrid, MixedSpacing) {
  const auto g = RadialGrid::make({});
  EXPECT_EQ(g->size(), 513u);
  EXPECT_EQ((*g)[0], 0.0);
  EXPECT_DOUBLE_EQ(g->r_max(), 64.0);
  double h_prev = (*g)[1] - (*g)[0];
  for (std::size_t i = 2; i < g->size(); ++i) {
    const double h = (*g)[i] - (*g)[i - 1];
    EXPECT_GE(h, h_prev * (1 - 1e-9));
    EXPECT_LE(h, h_prev * 1.03);
    h_prev = h;
  }
}

TEST(Interpolation, AccurateAndBounded) {
  const auto g = RadialGrid::make({});
  const auto psi = sample_radial(CharFn::gaussian(1.0), g);
  double worst = 0.0;
  for (double r = 0.0; r < 64.0; r += 0.0137) worst = std::max(worst, std::abs(psi.eval(r) - std::exp(-r * r / 2)));
  EXPECT_LT(worst, 1e-8);
  const auto sph = sample_radial(CharFn::uniform_sphere(1.0), g);
  for (double r = 0.0; r < 64.0; r += 0.0137) {
    EXPECT_LE(std::abs(sph.eval(r)), 1.0);
    // the log-spaced tail of the grid resolves sin r / r to ~1e-4
    EXPECT_NEAR(sph.eval(r), CharFn::uniform_sphere(1.0).radial(r), r < 20.0 ? 1e-6 : 1e-4);
  }
}

TEST(Interpolation, HolderExponent) {
  const auto g = RadialGrid::make({});
  EXPECT_NEAR(sample_radial(CharFn::gaussian(1.0), g).holder_exponent(), 2.0, 1e-3);
  // the fit sees r^0.7 (1 - r^0.7/2) at r <= 0.05, biased low by ~r^0.7/2
  EXPECT_NEAR(sample_radial(CharFn::stable(0.7), g).holder_exponent(), 0.7, 5e-2);
  EXPECT_TRUE(std::isinf(sample_radial(CharFn::unit(), g).holder_exponent()));
}

TEST(Holder, GaussianAndStable) {
  const auto pairs = random_pairs(2024, 1000, 5.0);
  EXPECT_LE(holder_inequality_check(CharFn::gaussian(1.0), pairs), 1e-12);
  EXPECT_LE(holder_inequality_check(CharFn::stable(0.5), pairs), 1e-12);
  EXPECT_EQ(holder_inequality_check(CharFn::unit(), pairs), 0.0);
}

TEST(Holder, AllVariantsSeeded) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto pairs = random_pairs(seed, 300, 8.0);
    const CharFn fns[] = {CharFn::uniform_sphere(1.0), CharFn::stable(1.5),
                          CharFn::discrete(random_mean_zero_measure(seed, 3, 8, 10.0))};
    for (const auto& f : fns) EXPECT_LE(holder_inequality_check(f, pairs), 1e-10) << f.name();
  }
}

TEST(Bochner, TrueCharacteristicFunctions) {
  const auto pts = random_points(7, 16, 3.0);
  EXPECT_GE(bochner_spotcheck(CharFn::gaussian(1.0), pts), -1e-10);
  EXPECT_GE(bochner_spotcheck(CharFn::discrete(random_mean_zero_measure(9, 3, 5, 4.0)), pts), -1e-10);
}

TEST(Bochner, DetectsNonPositiveDefiniteProfile) {
  std::vector<Point> line;
  for (int i = 0; i < 24; ++i) line.push_back({0.25 * i, 0, 0});
  EXPECT_LT(bochner_spotcheck([](double r) { return std::exp(-std::pow(r, 4)); }, line), -1e-6);
}

TEST(Discrete, ParseAndMoments) {
  std::istringstream in("# atoms\n1 0 0 0.25\n-1 0 0 0.25\n0 2 0 0.25\n0 -2 0 0.25\n");
  const auto m = DiscreteMeasure::parse(in, 3);
  EXPECT_TRUE(m.mean_zero());
  EXPECT_DOUBLE_EQ(m.moment(1.0), 1.5);
  EXPECT_DOUBLE_EQ(m.tail_moment(1.0, 1.5), 1.0);
  std::istringstream bad("1 0 0 0.5\n");
  EXPECT_THROW(DiscreteMeasure::parse(bad, 3), DomainError);
}

TEST(Discrete, TaylorBound) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_mean_zero_measure(seed, 3, 8, 10.0);
    const auto f = CharFn::discrete(m);
    for (const auto& p : random_points(seed + 100, 100, 1.0)) {
      const double r = norm(p);
      if (r == 0.0 || r > 1.0) continue;
      EXPECT_LE(std::abs(f.deviation(p)) / r, m.moment(1.0) * (1 + 1e-12));
    }
  }
}

TEST(Discrete, SeededMeasuresAreReproducible) {
  const auto a = random_mean_zero_measure(42, 3, 8, 10.0);
  const auto b = random_mean_zero_measure(42, 3, 8, 10.0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.weights()[i], b.weights()[i]);
  EXPECT_LE(a.size(), 8u);
  EXPECT_LE(a.max_speed(), 10.0);
}
