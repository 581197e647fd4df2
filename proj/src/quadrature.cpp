#include "bobylev/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

#include "bobylev/errors.hpp"

namespace bobylev {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  // zeros holds the non-negative roots in increasing order
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it == 0.0) continue;
    rule.nodes.push_back(-*it);
  }
  for (double z : zeros) rule.nodes.push_back(z);
  std::sort(rule.nodes.begin(), rule.nodes.end());
  rule.weights.reserve(rule.nodes.size());
  for (double x : rule.nodes) {
    const double dp = boost::math::legendre_p_prime(n, x);
    rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}
}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: node count must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

int auto_panel_count(double theta_min, double grading) {
  const double length = kHalfPi - theta_min;
  const double k = std::log(theta_min / length) / std::log(grading);
  return std::max(1, static_cast<int>(std::ceil(k)) + 1);
}

AngularQuadrature AngularQuadrature::build(double theta_min, int panel_count,
                                           int nodes_per_panel, double grading) {
  if (!(theta_min > 0.0 && theta_min < kHalfPi))
    throw ConfigError("angular quadrature: theta_min must lie in (0, pi/2)");
  if (!(grading > 0.0 && grading < 1.0))
    throw ConfigError("angular quadrature: grading must lie in (0, 1)");
  if (panel_count < 1 || nodes_per_panel < 1)
    throw ConfigError("angular quadrature: panel and node counts must be >= 1");

  const double length = kHalfPi - theta_min;
  std::vector<double> breaks;
  breaks.reserve(panel_count + 1);
  breaks.push_back(theta_min);
  for (int k = panel_count - 1; k >= 0; --k) {
    const double b = theta_min + length * std::pow(grading, k);
    // more panels than needed to reach theta_min collapse onto it
    if (b > breaks.back() * (1.0 + 1e-12)) breaks.push_back(b);
  }
  breaks.back() = kHalfPi;
  return from_breakpoints(std::move(breaks), nodes_per_panel);
}

AngularQuadrature AngularQuadrature::from_breakpoints(std::vector<double> breakpoints,
                                                      int nodes_per_panel) {
  if (breakpoints.size() < 2 || nodes_per_panel < 1)
    throw ConfigError("angular quadrature: need >= 2 breakpoints and >= 1 node");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ConfigError("angular quadrature: breakpoints must increase strictly");
  AngularQuadrature q;
  q.breaks_ = std::move(breakpoints);
  q.nodes_per_panel_ = nodes_per_panel;
  q.assemble();
  return q;
}

void AngularQuadrature::assemble() {
  const GaussRule& rule = gauss_legendre(nodes_per_panel_);
  nodes_.clear();
  weights_.clear();
  nodes_.reserve(panel_count() * rule.nodes.size());
  weights_.reserve(panel_count() * rule.nodes.size());
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    const double c = 0.5 * (breaks_[p] + breaks_[p + 1]);
    const double h = 0.5 * (breaks_[p + 1] - breaks_[p]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      nodes_.push_back(c + h * rule.nodes[k]);
      weights_.push_back(h * rule.weights[k]);
    }
  }
}

AngularQuadrature AngularQuadrature::with_breakpoint(double theta) const {
  if (!(theta > breaks_.front() && theta < breaks_.back())) return *this;
  auto it = std::lower_bound(breaks_.begin(), breaks_.end(), theta);
  if (it != breaks_.end() && std::abs(*it - theta) <= 1e-14 * theta) return *this;
  std::vector<double> b = breaks_;
  b.insert(b.begin() + (it - breaks_.begin()), theta);
  return from_breakpoints(std::move(b), nodes_per_panel_);
}

AngularQuadrature AngularQuadrature::with_max_panel(double max_length) const {
  if (!(max_length > 0.0)) return *this;
  std::vector<double> b{breaks_.front()};
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    const double len = breaks_[p + 1] - breaks_[p];
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_length - 1e-12)));
    for (int k = 1; k < pieces; ++k) b.push_back(breaks_[p] + len * k / pieces);
    b.push_back(breaks_[p + 1]);
  }
  return from_breakpoints(std::move(b), nodes_per_panel_);
}

AngularQuadrature AngularQuadrature::refined() const {
  std::vector<double> b{breaks_.front()};
  for (std::size_t p = 0; p + 1 < breaks_.size(); ++p) {
    b.push_back(0.5 * (breaks_[p] + breaks_[p + 1]));
    b.push_back(breaks_[p + 1]);
  }
  return from_breakpoints(std::move(b), nodes_per_panel_);
}

AngularQuadrature make_quadrature(const QuadratureSettings& s) {
  const int panels = s.panel_count > 0 ? s.panel_count : auto_panel_count(s.theta_min, s.grading);
  return AngularQuadrature::build(s.theta_min, panels, s.nodes_per_panel, s.grading)
      .with_max_panel(s.max_panel);
}

std::vector<double> log_breakpoints(double a, double b, int per_decade) {
  if (!(a > 0.0 && b > a)) throw DomainError("log_breakpoints: need 0 < a < b");
  const double decades = std::log10(b / a);
  const int n = std::max(1, static_cast<int>(std::ceil(decades * per_decade)));
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = a * std::pow(b / a, static_cast<double>(i) / n);
  out.front() = a;
  out.back() = b;
  return out;
}

std::vector<double> merge_breakpoints(std::vector<double> a, std::span<const double> b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  out.reserve(a.size());
  for (double x : a) {
    if (out.empty() || x - out.back() > 1e-12 * std::max(1.0, std::abs(x))) out.push_back(x);
  }
  return out;
}

}  // namespace bobylev
