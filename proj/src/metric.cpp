#include "bobylev/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "bobylev/errors.hpp"
#include "bobylev/quadrature.hpp"

namespace bobylev {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSphereResolution = 40.0;

void check_alpha_open(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw DomainError(fmt::format("{}: alpha must lie in (0, 2), got {}", what, alpha));
}

void check_same_dim(const CharFn& a, const CharFn& b) {
  if (a.dim() != b.dim())
    throw DomainError(fmt::format("dimension mismatch: {} vs {}", a.dim(), b.dim()));
}

bool both_isotropic(const CharFn& a, const CharFn& b) { return a.isotropic() && b.isotropic(); }

const RadialCharFn* grid_of(const CharFn& f) {
  if (const auto* g = std::get_if<CharFn::Grid>(&f.variant())) return g->psi.get();
  return nullptr;
}

bool on_grid(const CharFn& a, const CharFn& b) { return grid_of(a) || grid_of(b); }

// Radii of any grid-backed operands inside [lo, hi].
std::vector<double> grid_radii(const CharFn& a, const CharFn& b, double lo, double hi) {
  std::vector<double> out;
  for (const CharFn* f : {&a, &b})
    if (const auto* g = grid_of(*f))
      for (double r : g->grid().radii())
        if (r > lo && r < hi) out.push_back(r);
  return out;
}

// Log breakpoints on [lo, hi], refined to quarter periods of an oscillation
// of angular frequency k.
std::vector<double> radial_breaks(double lo, double hi, int per_decade, double k,
                                  std::span<const double> extra) {
  std::vector<double> br = log_breakpoints(lo, hi, per_decade);
  if (k > 0.0) {
    const double step = kPi / (2.0 * k);
    std::vector<double> uni;
    for (double r = std::ceil(lo / step) * step; r < hi; r += step)
      if (r > lo) uni.push_back(r);
    br = merge_breakpoints(std::move(br), uni);
  }
  if (!extra.empty()) br = merge_breakpoints(std::move(br), extra);
  return br;
}

// Series for 1 − m_d(r) with m_d the sphere average of cos(r u_1).
double small_r_deviation_coeff(int dim) { return 1.0 / (2.0 * dim); }
double small_r_deviation_coeff4(int dim) { return 1.0 / (8.0 * dim * (dim + 2.0)); }

// ∫_X^∞ m_d(s) s^{-1-α} ds by its first asymptotic terms.
double oscillatory_tail(int dim, double alpha, double X) {
  switch (dim) {
    case 1: {
      const double g = std::pow(X, -1.0 - alpha);
      const double gp = -(1.0 + alpha) * std::pow(X, -2.0 - alpha);
      return -std::sin(X) * g - std::cos(X) * gp;
    }
    case 2:
      return -std::sqrt(2.0 / kPi) * std::sin(X - kPi / 4.0) * std::pow(X, -1.5 - alpha);
    default: {
      const double h = std::pow(X, -2.0 - alpha);
      const double hp = -(2.0 + alpha) * std::pow(X, -3.0 - alpha);
      return std::cos(X) * h - std::sin(X) * hp;
    }
  }
}

struct InnerVerdict {
  double inner = 0.0;
  bool divergent = false;
  std::string growth;
};

// Contribution of (0, eps) from the two halvings [eps/2, eps], [eps/4, eps/2].
template <class F>
InnerVerdict inner_from_halvings(F&& g, double eps, double scale_ref) {
  const std::vector<double> b1{eps / 2.0, eps};
  const std::vector<double> b2{eps / 4.0, eps / 2.0};
  const double I1 = integrate_panels(g, b1).value;
  const double I2 = integrate_panels(g, b2).value;
  InnerVerdict v;
  if (!(I1 > 1e-15 * std::max(scale_ref, 1e-300)) || I1 <= 1e-300) return v;
  const double rho = I2 / I1;
  if (rho < 0.97) {
    v.inner = I1 / (1.0 - rho);
  } else {
    v.divergent = true;
    v.inner = kInf;
    v.growth = rho <= 1.03 ? "logarithmic" : "power";
  }
  return v;
}

}  // namespace

double sphere_area(int dim) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * kPi;
    case 3:
      return 4.0 * kPi;
    default:
      throw DomainError(fmt::format("sphere_area: dimension {} unsupported", dim));
  }
}

namespace {
SphereRule product_rule(int dim, int n_z, int n_az) {
  SphereRule r;
  if (dim == 1) {
    r.nodes = {{1, 0, 0}, {-1, 0, 0}};
    r.weights = {1.0, 1.0};
  } else if (dim == 2) {
    for (int k = 0; k < n_az; ++k) {
      const double t = 2.0 * kPi * (k + 0.5) / n_az;
      r.nodes.push_back({std::cos(t), std::sin(t), 0.0});
      r.weights.push_back(2.0 * kPi / n_az);
    }
  } else {
    const GaussRule& g = gauss_legendre(n_z);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double z = g.nodes[i];
      const double rho = std::sqrt(1.0 - z * z);
      for (int k = 0; k < n_az; ++k) {
        const double t = 2.0 * kPi * (k + 0.5) / n_az;
        r.nodes.push_back({rho * std::cos(t), rho * std::sin(t), z});
        r.weights.push_back(g.weights[i] * 2.0 * kPi / n_az);
      }
    }
  }
  return r;
}
}  // namespace

const SphereRule& sphere_rule(int dim) {
  static const SphereRule rules[3] = {product_rule(1, 0, 0), product_rule(2, 0, 240), product_rule(3, 12, 20)};
  if (dim < 1 || dim > 3) throw DomainError("sphere_rule: dimension must be 1, 2 or 3");
  return rules[dim - 1];
}

const SphereRule& sphere_rule_fine(int dim) {
  static const SphereRule rules[3] = {product_rule(1, 0, 0), product_rule(2, 0, 256), product_rule(3, 48, 96)};
  if (dim < 1 || dim > 3) throw DomainError("sphere_rule: dimension must be 1, 2 or 3");
  return rules[dim - 1];
}

NormResult sup_norm(const CharFn& a, const CharFn& b, double alpha, const SupOptions& opt) {
  check_same_dim(a, b);
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("sup_norm: alpha must lie in (0, 2]");
  NormResult res;
  const double r_hi = std::min({opt.r_hi, a.max_radius(), b.max_radius()});
  const bool iso = both_isotropic(a, b);
  const bool on_grid = grid_of(a) || grid_of(b);

  std::vector<double> radii;
  if (on_grid) {
    radii = grid_radii(a, b, 0.0, r_hi * (1.0 + 1e-12));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  } else {
    radii = log_breakpoints(opt.r_lo, r_hi, opt.per_decade);
  }
  res.eps = radii.front();
  res.R = radii.back();

  std::vector<Point> dirs;
  if (!iso) {
    const auto& rule = sphere_rule(a.dim());
    dirs.assign(rule.nodes.begin(), rule.nodes.end());
    for (int j = 0; j < a.dim(); ++j) {
      Point e{0, 0, 0};
      e[j] = 1.0;
      dirs.push_back(e);
      e[j] = -1.0;
      dirs.push_back(e);
    }
  }
  const auto diff = [&](double r) {
    if (iso) return std::abs(b.radial_deviation(r) - a.radial_deviation(r));
    double m = 0.0;
    for (const auto& u : dirs) {
      const Point x{r * u[0], r * u[1], r * u[2]};
      m = std::max(m, std::abs(b.deviation(x) - a.deviation(x)));
    }
    return m;
  };
  const auto ratio = [&](double r) { return diff(r) / std::pow(r, alpha); };

  std::size_t best = 0;
  double best_val = -1.0;
  std::vector<double> d(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    d[i] = diff(radii[i]);
    const double q = d[i] / std::pow(radii[i], alpha);
    if (q > best_val) {
      best_val = q;
      best = i;
    }
  }
  if (iso && !on_grid && best > 0 && best + 1 < radii.size()) {
    // golden-section search for the maximum between the neighbours
    double lo = radii[best - 1];
    double hi = radii[best + 1];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = ratio(x1);
    double f2 = ratio(x2);
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = ratio(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = ratio(x1);
      }
    }
    best_val = std::max({best_val, f1, f2});
  }
  res.value = std::max(best_val, 0.0);

  // Hölder exponent of the difference at the smallest radii, ignoring
  // differences at the rounding level of O(1) values.
  constexpr double kNoise = 64.0 * std::numeric_limits<double>::epsilon();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < radii.size() && m < 5; ++i) {
    if (radii[i] <= 0.0 || !(d[i] > kNoise)) continue;
    const double x = std::log(radii[i]);
    const double y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    const double p = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (p < alpha - 0.02) {
      res.divergent = true;
      res.growth = "power";
    }
  }
  return res;
}

NormResult m_norm(const CharFn& a, const CharFn& b, double alpha, const IntegralOptions& opt) {
  check_same_dim(a, b);
  check_alpha_open(alpha, "m_norm");
  if (!(opt.eps > 0.0 && opt.R > opt.eps)) throw DomainError("m_norm: need 0 < eps < R");
  const int d = a.dim();
  const double S = sphere_area(d);
  NormResult res;
  res.eps = opt.eps;
  res.R = std::min({opt.R, a.max_radius(), b.max_radius()});
  const bool iso = both_isotropic(a, b);
  const double k = std::max(a.oscillation(), b.oscillation());
  if (k > 0.0 && !grid_of(a) && !grid_of(b)) {
    // Direction averages are only resolved by the sphere rule while
    // |ξ| k stays moderate; beyond that the tail bound takes over.
    res.R = std::min(res.R, iso ? opt.max_periods * 2.0 * kPi / k : kSphereResolution / k);
  }
  if (!(res.R > res.eps)) throw DomainError("m_norm: truncation radius below eps");

  const SphereRule& coarse = sphere_rule(d);
  const SphereRule& fine = sphere_rule_fine(d);
  const auto g = [&](double r) {
    double v;
    if (iso) {
      v = S * std::abs(b.radial_deviation(r) - a.radial_deviation(r));
    } else {
      // the coarse rule is accurate to ~1e-9 while |ξ| k <= 4
      const SphereRule& rule = r * k <= 4.0 ? coarse : fine;
      v = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const Point& u = rule.nodes[j];
        const Point x{r * u[0], r * u[1], r * u[2]};
        v += rule.weights[j] * std::abs(b.deviation(x) - a.deviation(x));
      }
    }
    return v * std::pow(r, -1.0 - alpha);
  };

  const auto extra = grid_radii(a, b, res.eps, res.R);
  const auto breaks = radial_breaks(res.eps, res.R, opt.per_decade, k, extra);
  const PanelIntegral main = integrate_panels(g, breaks);
  res.value = main.value;
  res.est_error = main.error;
  double dev_max = 2.0;
  if (iso && on_grid(a, b) && res.R < opt.R) {
    // beyond the grid the deviation is taken to stay within its range over the last octave
    dev_max = 0.0;
    for (double r : grid_radii(a, b, 0.5 * res.R, res.R))
      dev_max = std::max(dev_max, std::abs(b.radial_deviation(r) - a.radial_deviation(r)));
  }
  res.tail_bound = dev_max * S * std::pow(res.R, -alpha) / alpha;
  const InnerVerdict v = inner_from_halvings(g, res.eps, main.value);
  res.inner = v.inner;
  res.divergent = v.divergent;
  res.growth = v.growth;
  return res;
}

NormResult dis_ab(const CharFn& a, const CharFn& b, double alpha, double beta,
                  const IntegralOptions& iopt, const SupOptions& sopt) {
  const NormResult m = m_norm(a, b, alpha, iopt);
  const NormResult s = sup_norm(a, b, beta, sopt);
  NormResult res = m;
  res.value = m.value + s.value;
  res.divergent = m.divergent || s.divergent;
  if (res.growth.empty()) res.growth = s.growth;
  return res;
}

double c_constant(double alpha, int dim, double M) {
  check_alpha_open(alpha, "c_constant");
  if (!(M > 0.0)) throw DomainError("c_constant: M must be positive");
  static std::mutex mutex;
  static std::map<std::tuple<double, int, double>, double> cache;
  const auto key = std::make_tuple(alpha, dim, M);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double S = sphere_area(dim);
  const double r_a = std::min(1e-3, M);
  const double c2 = small_r_deviation_coeff(dim);
  const double c4 = small_r_deviation_coeff4(dim);
  double sum = c2 * std::pow(r_a, 2.0 - alpha) / (2.0 - alpha) - c4 * std::pow(r_a, 4.0 - alpha) / (4.0 - alpha);
  const double r_end = std::isinf(M) ? 2e4 : M;
  if (r_end > r_a) {
    const auto g = [&](double r) {
      return CharFn::uniform_sphere(1.0, dim).radial_deviation(r) * std::pow(r, -1.0 - alpha);
    };
    const auto breaks = radial_breaks(r_a, r_end, 16, 1.0, {});
    const PanelIntegral p = integrate_panels(g, breaks);
    if (p.error > 1e-9 * std::abs(p.value))
      throw AccuracyError(fmt::format("c_constant: quadrature error {} too large", p.error));
    sum += p.value;
  }
  if (std::isinf(M)) sum += std::pow(r_end, -alpha) / alpha - oscillatory_tail(dim, alpha, r_end);
  const double value = 0.5 * S * sum;
  std::lock_guard lock(mutex);
  cache.emplace(key, value);
  return value;
}

double tail_moment_bound(const CharFn& phi, double alpha, double R) {
  check_alpha_open(alpha, "tail_moment_bound");
  if (!(R > 0.0)) throw DomainError("tail_moment_bound: R must be positive");
  IntegralOptions opt;
  opt.R = std::min(1.0 / R, phi.max_radius());
  opt.eps = std::min(opt.eps, opt.R * 1e-6);
  const NormResult n = m_norm(phi, CharFn::unit(phi.dim()), alpha, opt);
  if (n.divergent) return kInf;
  return (n.value + n.inner) / (2.0 * c_constant(alpha, phi.dim(), 1.0));
}

NormResult moment_upper(const CharFn& phi, double alpha, const IntegralOptions& opt) {
  NormResult n = m_norm(phi, CharFn::unit(phi.dim()), alpha, opt);
  const double c = c_constant(alpha, phi.dim());
  if (n.divergent) {
    n.value = kInf;
    return n;
  }
  n.value = (n.value + n.inner + n.tail_bound) / (2.0 * c);
  n.est_error /= 2.0 * c;
  n.inner = 0.0;
  return n;
}

NormResult moment_exact(const CharFn& phi, double alpha, const IntegralOptions& opt) {
  check_alpha_open(alpha, "moment_exact");
  const int d = phi.dim();
  const double S = sphere_area(d);
  NormResult res;
  res.eps = opt.eps;

  const auto* disc = std::get_if<CharFn::Discrete>(&phi.variant());
  const auto* sphere = std::get_if<CharFn::UniformSphere>(&phi.variant());
  const RadialCharFn* grid = grid_of(phi);

  // Shells (speed, weight) for the analytic small-r and large-r parts.
  std::vector<std::pair<double, double>> shells;
  if (disc) {
    for (std::size_t i = 0; i < disc->measure.size(); ++i)
      shells.emplace_back(norm(disc->measure.points()[i]), disc->measure.weights()[i]);
  } else if (sphere) {
    shells.emplace_back(sphere->r0, 1.0);
  }
  double k_min = kInf;
  double k_max = 0.0;
  double w_moving = 0.0;
  for (auto [k, w] : shells)
    if (k > 0.0) {
      k_min = std::min(k_min, k);
      k_max = std::max(k_max, k);
      w_moving += w;
    }
  if (!shells.empty() && k_max == 0.0) return res;  // Dirac mass at 0

  if (grid) {
    res.R = grid->grid().r_max();
  } else if (!shells.empty()) {
    res.R = 400.0 * kPi / k_min;
  } else {
    res.R = opt.R;
  }
  res.eps = std::min(opt.eps, res.R * 1e-6);

  const auto g = [&](double r) { return S * phi.spherical_mean_deviation(r) * std::pow(r, -1.0 - alpha); };
  const std::vector<double> extra = grid ? grid_radii(phi, phi, res.eps, res.R) : std::vector<double>{};
  const auto breaks = radial_breaks(res.eps, res.R, opt.per_decade, k_max, extra);
  const PanelIntegral main = integrate_panels(g, breaks);

  double inner = 0.0;
  double tail = 0.0;
  if (!shells.empty()) {
    const double c2 = small_r_deviation_coeff(d);
    for (auto [k, w] : shells) {
      if (k == 0.0) continue;
      inner += S * w * c2 * k * k * std::pow(res.eps, 2.0 - alpha) / (2.0 - alpha);
      tail -= S * w * std::pow(k, alpha) * oscillatory_tail(d, alpha, k * res.R);
    }
    tail += S * w_moving * std::pow(res.R, -alpha) / alpha;
  } else {
    const InnerVerdict v = inner_from_halvings(g, res.eps, main.value);
    if (v.divergent) {
      res.divergent = true;
      res.growth = v.growth;
      res.value = kInf;
      return res;
    }
    inner = v.inner;
    const double dev_R = grid ? grid->deviation(res.R) : phi.radial_deviation(res.R);
    tail = S * dev_R * std::pow(res.R, -alpha) / alpha;
  }
  const double c = c_constant(alpha, d);
  res.value = (main.value + inner + tail) / (2.0 * c);
  res.est_error = main.error / (2.0 * c);
  res.tail_bound = 2.0 * S * std::pow(res.R, -alpha) / alpha;
  return res;
}

EmbeddingCheck embedding_check(const CharFn& phi, double alpha, double beta) {
  check_alpha_open(alpha, "embedding_check");
  if (!(beta > 0.0 && beta <= 2.0)) throw DomainError("embedding_check: beta must lie in (0, 2]");
  EmbeddingCheck out;
  const CharFn one = CharFn::unit(phi.dim());
  const NormResult m = m_norm(phi, one, alpha);
  out.lhs_divergent = m.divergent;
  out.lhs = m.divergent ? kInf : m.estimate();
  if (beta == alpha) {
    out.degenerate = true;
    out.rhs = kInf;
    return out;
  }
  if (beta < alpha) {
    out.inapplicable = true;
    out.rhs = kInf;
    return out;
  }
  const NormResult s = sup_norm(phi, one, beta);
  out.constant = embedding_constant(alpha, beta, phi.dim());
  out.rhs = s.divergent ? kInf : out.constant * std::pow(s.value, alpha / beta);
  out.holds = !out.lhs_divergent && out.lhs <= out.rhs * (1.0 + 1e-9);
  return out;
}

double embedding_constant(double alpha, double beta, int dim) {
  if (!(alpha > 0.0 && beta > alpha)) throw DomainError("embedding_constant: need 0 < alpha < beta");
  const double S = sphere_area(dim);
  return 2.0 * S / alpha + S / (beta - alpha);
}

double taylor_constant(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("taylor_constant: alpha must lie in (0, 2]");
  const bool linear = alpha > 1.0;
  const auto f = [&](double x) {
    const double h = std::sin(x / 2.0);
    double num;
    if (!linear) {
      num = 2.0 * std::abs(h);
    } else {
      const double re = 2.0 * h * h;
      const double x2 = x * x;
      const double im = std::abs(x) < 1e-2 ? x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0)) : x - std::sin(x);
      num = std::hypot(re, im);
    }
    return num / std::pow(x, alpha);
  };
  const auto xs = log_breakpoints(1e-6, 1e8, 200);
  std::size_t best = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (f(xs[i]) > f(xs[best])) best = i;
  double value = f(xs[best]);
  if (best > 0 && best + 1 < xs.size()) {
    double lo = xs[best - 1];
    double hi = xs[best + 1];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80; ++it) {
      const double x1 = hi - g * (hi - lo);
      const double x2 = lo + g * (hi - lo);
      if (f(x1) < f(x2)) lo = x1;
      else hi = x2;
    }
    value = std::max(value, f(0.5 * (lo + hi)));
  }
  if (alpha == 1.0) value = 1.0;  // |1 − e^{-ix}| <= |x|, attained as x → 0
  if (alpha == 2.0) value = std::max(value, 0.5);  // limit as x → 0
  return value;
}

SandwichConstants sandwich_constants(double alpha, int dim) {
  const double c1 = taylor_constant(alpha);
  return {c1, c1 / (2.0 * c_constant(alpha, dim))};
}

std::vector<CFixture> compute_c_fixtures() {
  std::vector<CFixture> rows;
  for (double a : {0.3, 0.5, 1.0, 1.5, 1.9})
    for (int d : {1, 2, 3})
      for (double M : {1.0, 4.0, kInf}) rows.push_back({a, d, M, c_constant(a, d, M)});
  return rows;
}

void write_c_fixtures(const std::string& path, const std::vector<CFixture>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write fixtures '{}'", path));
  out << "# alpha dim M c_{alpha,dim,M}\n";
  for (const auto& r : rows)
    out << fmt::format("{} {} {} {:.17g}\n", r.alpha, r.dim, std::isinf(r.M) ? std::string("inf") : fmt::format("{}", r.M),
                       r.value);
}

std::vector<CFixture> read_c_fixtures(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open fixtures '{}'", path));
  std::vector<CFixture> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    CFixture r{};
    std::string m;
    if (!(ss >> r.alpha >> r.dim >> m >> r.value)) throw ConfigError(fmt::format("bad fixture line '{}'", line));
    r.M = m == "inf" ? kInf : std::stod(m);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace bobylev
