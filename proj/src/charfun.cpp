#include "bobylev/charfun.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>
#include <fmt/format.h>

#include "bobylev/errors.hpp"

namespace bobylev {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// 1 − sin(x)/x, stable for small x.
double one_minus_sinc(double x) {
  const double x2 = x * x;
  if (std::abs(x) < 1e-2) return x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
  return 1.0 - std::sin(x) / x;
}

// Characteristic function of the uniform law on the sphere of radius 1 in
// R^d, as a function of |ξ| r0; and its deviation from 1.
double sphere_profile(int dim, double x) {
  switch (dim) {
    case 1:
      return std::cos(x);
    case 2:
      return boost::math::cyl_bessel_j(0, x);
    default:
      return x == 0.0 ? 1.0 : std::sin(x) / x;
  }
}

double sphere_deviation(int dim, double x) {
  switch (dim) {
    case 1:
      return 2.0 * std::pow(std::sin(x / 2.0), 2);
    case 2:
      if (std::abs(x) < 1e-2) {
        const double q = x * x / 4.0;
        return q * (1.0 - q / 4.0 * (1.0 - q / 9.0));
      }
      return 1.0 - boost::math::cyl_bessel_j(0, x);
    default:
      return one_minus_sinc(x);
  }
}

void check_dim(int dim) {
  if (dim < 1 || dim > 3) throw DomainError(fmt::format("dimension must be 1, 2 or 3, got {}", dim));
}

}  // namespace

double norm(const Point& x) { return std::sqrt(dot(x, x)); }
double dot(const Point& x, const Point& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

DiscreteMeasure::DiscreteMeasure(int dim, std::vector<Point> points, std::vector<double> weights)
    : dim_(dim), points_(std::move(points)), weights_(std::move(weights)) {
  check_dim(dim);
  if (points_.empty() || points_.size() != weights_.size())
    throw DomainError("discrete measure: need matching, non-empty atom and weight lists");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw DomainError("discrete measure: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError(fmt::format("discrete measure: weights sum to {}, not 1", total));
  for (auto& p : points_)
    for (int j = dim; j < 3; ++j)
      if (p[j] != 0.0) throw DomainError("discrete measure: coordinate beyond the dimension");
}

DiscreteMeasure DiscreteMeasure::parse(std::istream& in, int dim) {
  check_dim(dim);
  std::vector<Point> pts;
  std::vector<double> ws;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Point p{0, 0, 0};
    double w;
    for (int j = 0; j < dim; ++j)
      if (!(ss >> p[j])) throw ConfigError(fmt::format("atom table line {}: expected {} coordinates", lineno, dim));
    if (!(ss >> w)) throw ConfigError(fmt::format("atom table line {}: missing weight", lineno));
    std::string extra;
    if (ss >> extra) throw ConfigError(fmt::format("atom table line {}: trailing text '{}'", lineno, extra));
    pts.push_back(p);
    ws.push_back(w);
  }
  return DiscreteMeasure(dim, std::move(pts), std::move(ws));
}

DiscreteMeasure DiscreteMeasure::load(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open atom table '{}'", path));
  return parse(in, dim);
}

bool DiscreteMeasure::mean_zero(double tol) const {
  Point m{0, 0, 0};
  for (std::size_t i = 0; i < size(); ++i)
    for (int j = 0; j < 3; ++j) m[j] += weights_[i] * points_[i][j];
  return norm(m) <= tol * std::max(1.0, max_speed());
}

bool DiscreteMeasure::symmetric(double tol) const {
  std::vector<bool> used(size(), false);
  for (std::size_t i = 0; i < size(); ++i) {
    if (used[i]) continue;
    bool found = false;
    for (std::size_t j = 0; j < size() && !found; ++j) {
      if (used[j] && j != i) continue;
      const Point& a = points_[i];
      const Point& b = points_[j];
      const Point sum{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
      if (norm(sum) <= tol * std::max(1.0, norm(a)) && std::abs(weights_[i] - weights_[j]) <= tol) {
        used[i] = used[j] = true;
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

double DiscreteMeasure::moment(double alpha) const { return tail_moment(alpha, 0.0); }

double DiscreteMeasure::tail_moment(double alpha, double R) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double v = norm(points_[i]);
    if (v >= R && v > 0.0) s += weights_[i] * std::pow(v, alpha);
  }
  return s;
}

double DiscreteMeasure::max_speed() const {
  double m = 0.0;
  for (const auto& p : points_) m = std::max(m, norm(p));
  return m;
}

DiscreteMeasure random_mean_zero_measure(std::uint64_t seed, int dim, int max_atoms,
                                         double max_speed) {
  check_dim(dim);
  if (max_atoms < 2) throw DomainError("random measure: need room for at least one pair");
  std::mt19937_64 rng(seed);
  const int pairs = 1 + static_cast<int>(unit_uniform(rng) * (max_atoms / 2));
  const bool center = 2 * pairs < max_atoms && unit_uniform(rng) < 0.5;
  std::vector<Point> pts;
  std::vector<double> ws;
  double total = 0.0;
  for (int k = 0; k < pairs; ++k) {
    Point dir{0, 0, 0};
    double len = 0.0;
    while (len < 1e-3) {
      for (int j = 0; j < dim; ++j) dir[j] = 2.0 * unit_uniform(rng) - 1.0;
      len = norm(dir);
      if (len > 1.0) len = 0.0;
    }
    const double speed = max_speed * (0.05 + 0.95 * unit_uniform(rng));
    Point v{0, 0, 0};
    for (int j = 0; j < dim; ++j) v[j] = speed * dir[j] / len;
    const double w = 0.1 + unit_uniform(rng);
    pts.push_back(v);
    pts.push_back({-v[0], -v[1], -v[2]});
    ws.push_back(w);
    ws.push_back(w);
    total += 2.0 * w;
  }
  if (center) {
    const double w = 0.1 + unit_uniform(rng);
    pts.push_back({0, 0, 0});
    ws.push_back(w);
    total += w;
  }
  for (double& w : ws) w /= total;
  // Renormalize exactly against rounding in the division.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < ws.size(); ++i) s += ws[i];
  ws.back() = 1.0 - s;
  return DiscreteMeasure(dim, std::move(pts), std::move(ws));
}

CharFn CharFn::unit(int dim) {
  check_dim(dim);
  return CharFn(Unit{}, dim);
}

CharFn CharFn::gaussian(double sigma, int dim) {
  check_dim(dim);
  if (!(sigma > 0.0)) throw DomainError("gaussian: sigma must be positive");
  return CharFn(Gaussian{sigma}, dim);
}

CharFn CharFn::stable(double alpha, int dim) {
  check_dim(dim);
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable: index must lie in (0, 2)");
  return CharFn(Stable{alpha}, dim);
}

CharFn CharFn::uniform_sphere(double r0, int dim) {
  check_dim(dim);
  if (!(r0 > 0.0)) throw DomainError("uniform_sphere: radius must be positive");
  return CharFn(UniformSphere{r0}, dim);
}

CharFn CharFn::discrete(DiscreteMeasure m) {
  const int d = m.dim();
  return CharFn(Discrete{std::move(m)}, d);
}

CharFn CharFn::radial_grid(RadialCharFn psi) {
  return CharFn(Grid{std::make_shared<const RadialCharFn>(std::move(psi))}, 3);
}

std::string CharFn::name() const {
  return std::visit(overloaded{
                        [](const Unit&) { return std::string("unit"); },
                        [](const Gaussian& g) { return fmt::format("gaussian({})", g.sigma); },
                        [](const Stable& s) { return fmt::format("stable({})", s.alpha); },
                        [](const UniformSphere& u) { return fmt::format("uniform_sphere({})", u.r0); },
                        [](const Discrete& d) { return fmt::format("discrete({} atoms)", d.measure.size()); },
                        [](const Grid& g) { return fmt::format("radial_grid({} points)", g.psi->size()); },
                    },
                    v_);
}

bool CharFn::isotropic() const {
  if (const auto* d = std::get_if<Discrete>(&v_)) {
    if (d->measure.max_speed() == 0.0) return true;
    return dim_ == 1 && d->measure.symmetric();
  }
  return true;
}

std::complex<double> CharFn::eval(const Point& xi) const {
  const double r = norm(xi);
  return std::visit(overloaded{
                        [&](const Discrete& d) {
                          std::complex<double> s = 0.0;
                          const auto pts = d.measure.points();
                          const auto ws = d.measure.weights();
                          for (std::size_t i = 0; i < pts.size(); ++i)
                            s += ws[i] * std::polar(1.0, -dot(pts[i], xi));
                          return s;
                        },
                        [&](const auto&) { return std::complex<double>(radial(r), 0.0); },
                    },
                    v_);
}

std::complex<double> CharFn::eval_along(double r) const { return eval(Point{r, 0.0, 0.0}); }

double CharFn::radial(double r) const {
  return std::visit(overloaded{
                        [&](const Unit&) { return 1.0; },
                        [&](const Gaussian& g) { return std::exp(-0.5 * g.sigma * g.sigma * r * r); },
                        [&](const Stable& s) { return std::exp(-std::pow(r, s.alpha)); },
                        [&](const UniformSphere& u) { return sphere_profile(dim_, u.r0 * r); },
                        [&](const Discrete& d) {
                          if (!isotropic()) throw VariantError("radial profile of a non-isotropic discrete measure");
                          double s = 0.0;
                          const auto pts = d.measure.points();
                          const auto ws = d.measure.weights();
                          for (std::size_t i = 0; i < pts.size(); ++i) s += ws[i] * std::cos(pts[i][0] * r);
                          return s;
                        },
                        [&](const Grid& g) { return g.psi->eval(r); },
                    },
                    v_);
}

double CharFn::radial_deviation(double r) const {
  return std::visit(overloaded{
                        [&](const Unit&) { return 0.0; },
                        [&](const Gaussian& g) { return -std::expm1(-0.5 * g.sigma * g.sigma * r * r); },
                        [&](const Stable& s) { return -std::expm1(-std::pow(r, s.alpha)); },
                        [&](const UniformSphere& u) { return sphere_deviation(dim_, u.r0 * r); },
                        [&](const Discrete& d) {
                          if (!isotropic()) throw VariantError("radial profile of a non-isotropic discrete measure");
                          double s = 0.0;
                          const auto pts = d.measure.points();
                          const auto ws = d.measure.weights();
                          for (std::size_t i = 0; i < pts.size(); ++i)
                            s += ws[i] * 2.0 * std::pow(std::sin(pts[i][0] * r / 2.0), 2);
                          return s;
                        },
                        [&](const Grid& g) { return g.psi->deviation(r); },
                    },
                    v_);
}

std::complex<double> CharFn::deviation(const Point& xi) const {
  if (const auto* d = std::get_if<Discrete>(&v_)) {
    std::complex<double> s = 0.0;
    const auto pts = d->measure.points();
    const auto ws = d->measure.weights();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = dot(pts[i], xi);
      const double sh = std::sin(x / 2.0);
      s += ws[i] * std::complex<double>(2.0 * sh * sh, std::sin(x));
    }
    return s;
  }
  return {radial_deviation(norm(xi)), 0.0};
}

double CharFn::spherical_mean_deviation(double r) const {
  if (const auto* d = std::get_if<Discrete>(&v_)) {
    double s = 0.0;
    const auto pts = d->measure.points();
    const auto ws = d->measure.weights();
    for (std::size_t i = 0; i < pts.size(); ++i) s += ws[i] * sphere_deviation(dim_, norm(pts[i]) * r);
    return s;
  }
  return radial_deviation(r);
}

double CharFn::oscillation() const {
  if (const auto* d = std::get_if<Discrete>(&v_)) return d->measure.max_speed();
  if (const auto* u = std::get_if<UniformSphere>(&v_)) return u->r0;
  return 0.0;
}

double CharFn::max_radius() const {
  if (const auto* g = std::get_if<Grid>(&v_)) return g->psi->grid().r_max();
  return std::numeric_limits<double>::infinity();
}

RadialCharFn sample_radial(const CharFn& phi, std::shared_ptr<const RadialGrid> grid) {
  if (!phi.isotropic()) throw VariantError(fmt::format("sample_radial: {} is not isotropic", phi.name()));
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 - phi.radial_deviation((*grid)[i]);
  v[0] = 1.0;
  return RadialCharFn(std::move(grid), std::move(v));
}

double holder_inequality_check(const CharFn& phi,
                               std::span<const std::pair<Point, Point>> pairs) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& [xi, eta] : pairs) {
    const Point sum{xi[0] + eta[0], xi[1] + eta[1], xi[2] + eta[2]};
    const auto a = phi.eval(xi);
    const auto b = phi.eval(sum);
    const auto c = phi.eval(eta);
    const double lhs = std::abs(a - b);
    const double one_a = std::abs(1.0 - a);
    const double one_c = std::abs(1.0 - c);
    const double rhs = 4.0 * std::sqrt(one_a) * std::sqrt(one_c) + one_c;
    worst = std::max(worst, lhs - rhs);
  }
  return pairs.empty() ? 0.0 : worst;
}

namespace {
double gram_min_eigenvalue(const std::function<std::complex<double>(const Point&)>& f,
                           std::span<const Point> points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  if (k == 0) return 0.0;
  if (k > 64) throw DomainError("bochner_spotcheck: at most 64 sample points");
  Eigen::MatrixXcd G(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Point& a = points[i];
      const Point& b = points[j];
      G(i, j) = f(Point{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
    }
  // Symmetrize against rounding so the solver sees an exactly Hermitian matrix.
  const Eigen::MatrixXcd H = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("bochner_spotcheck: eigen-solve failed");
  return es.eigenvalues().minCoeff();
}
}  // namespace

double bochner_spotcheck(const CharFn& phi, std::span<const Point> points) {
  return gram_min_eigenvalue([&](const Point& x) { return phi.eval(x); }, points);
}

double bochner_spotcheck(const std::function<double(double)>& profile,
                         std::span<const Point> points) {
  return gram_min_eigenvalue([&](const Point& x) { return std::complex<double>(profile(norm(x)), 0.0); },
                             points);
}

}  // namespace bobylev
