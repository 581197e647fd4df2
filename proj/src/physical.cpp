#include "bobylev/physical.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "bobylev/charfun.hpp"
#include "bobylev/errors.hpp"
#include "bobylev/metric.hpp"

namespace bobylev {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLobe = 1e-6;

// ψ at r_k = k R / n with n a multiple of `multiple`.
struct Samples {
  double h = 0.0;
  std::vector<double> r, psi;
};

Samples sample_uniform(const RadialCharFn& psi, double R, double h_max, std::size_t multiple) {
  if (!(R > 0.0)) throw DomainError("physical: truncation radius must be positive");
  if (R > psi.grid().r_max() * (1.0 + 1e-12))
    throw RangeError(fmt::format("physical: truncation radius {} beyond grid end {}", R, psi.grid().r_max()));
  auto n = static_cast<std::size_t>(std::ceil(R / h_max));
  n = ((n + multiple - 1) / multiple) * multiple;
  Samples s;
  s.h = R / static_cast<double>(n);
  s.r.resize(n + 1);
  s.psi.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    s.r[k] = std::min(R, s.h * static_cast<double>(k));
    s.psi[k] = psi.eval(s.r[k]);
  }
  return s;
}

// Composite Simpson of g over samples [0, m] (m even).
template <class G>
double simpson(const Samples& s, std::size_t m, G&& g) {
  double sum = g(0) + g(m);
  for (std::size_t k = 1; k < m; ++k) sum += (k % 2 ? 4.0 : 2.0) * g(k);
  return sum * s.h / 3.0;
}

// Trapezoid of y over x with an extra segment from (0, 0).
double trapezoid_from_zero(std::span<const double> x, const std::vector<double>& y) {
  double sum = 0.5 * x[0] * y[0];
  for (std::size_t i = 0; i + 1 < x.size(); ++i) sum += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
  return sum;
}

// The same over every second point, for a Richardson error estimate.
double trapezoid_coarse(std::span<const double> x, const std::vector<double>& y) {
  std::vector<double> xc, yc;
  for (std::size_t i = x.size() % 2 ? 0 : 1; i < x.size(); i += 2) {
    xc.push_back(x[i]);
    yc.push_back(y[i]);
  }
  if (xc.back() != x.back()) {
    xc.push_back(x.back());
    yc.push_back(y.back());
  }
  return trapezoid_from_zero(xc, yc);
}
}  // namespace

std::vector<double> speed_grid(double v_max, std::size_t n) {
  if (!(v_max > 0.0) || n < 2) throw DomainError("speed_grid: need v_max > 0 and n >= 2");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = v_max * static_cast<double>(i + 1) / static_cast<double>(n);
  return v;
}

DensityProfile inverse_transform(const RadialCharFn& psi, std::span<const double> v, double R) {
  if (v.empty()) throw DomainError("inverse_transform: empty speed grid");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || (i > 0 && !(v[i] > v[i - 1])))
      throw DomainError("inverse_transform: speeds must be positive and increasing");

  const double h_max = std::min(0.0025, 0.05 / v.back());
  const Samples s = sample_uniform(psi, R, h_max, 4);
  const std::size_t n = s.r.size() - 1;

  DensityProfile out;
  out.v.assign(v.begin(), v.end());
  out.R = R;

  // tail of ∫ |ψ| r² dr from the last two octaves
  auto window = [&](std::size_t a, std::size_t b) {
    double w = 0.0;
    for (std::size_t k = a; k < b; ++k)
      w += 0.5 * s.h * (std::abs(s.psi[k]) * s.r[k] * s.r[k] + std::abs(s.psi[k + 1]) * s.r[k + 1] * s.r[k + 1]);
    return w;
  };
  const double w0 = window(n / 4, n / 2);
  const double w1 = window(n / 2, n);
  double tail = 0.0;
  if (w1 > 1e-300) {
    const double q = w0 > 0.0 ? w1 / w0 : kInf;
    if (q < 1.0) {
      tail = w1 * q / (1.0 - q);
    } else {
      tail = kInf;
      out.applicable = false;
      out.note = fmt::format(
          "ψ does not decay: ∫|ψ|r² dr over [R/2, R] is {} times that over [R/4, R/2]; the law has no density",
          q);
    }
  }
  out.truncation_error = tail / (2.0 * kPi * kPi);

  out.f.resize(v.size());
  std::vector<double> df(v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(v.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double vi = v[i];
    // Simpson on the full samples and on every second one
    double fine = 0.0, coarse = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double y = s.psi[k] * s.r[k] * std::sin(s.r[k] * vi);
      const bool end = k == 0 || k == n;
      fine += (end ? 1.0 : (k % 2 ? 4.0 : 2.0)) * y;
      if (k % 2 == 0) coarse += (end ? 1.0 : (k % 4 ? 4.0 : 2.0)) * y;
    }
    fine *= s.h / 3.0;
    coarse *= 2.0 * s.h / 3.0;
    out.f[i] = fine / (2.0 * kPi * kPi * vi);
    df[i] = std::abs(fine - coarse) / 15.0 / (2.0 * kPi * kPi * vi);
  }
  out.quadrature_error = *std::max_element(df.begin(), df.end());

  std::vector<double> g(v.size());
  out.min_value = kInf;
  for (std::size_t i = 0; i < v.size(); ++i) {
    g[i] = 4.0 * kPi * v[i] * v[i] * out.f[i];
    out.min_value = std::min(out.min_value, out.f[i]);
    if (out.f[i] < -kLobe) out.negative_lobes = true;
  }
  std::vector<double> clipped(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (out.f[i] < 0.0 && out.f[i] >= -kLobe) clipped[i] = -g[i];
  out.clipped_mass = trapezoid_from_zero(v, clipped);

  out.mass = trapezoid_from_zero(v, g);
  const double coarse = v.size() >= 3 ? trapezoid_coarse(v, g) : out.mass;
  const double vmax = v.back();
  // negative values are pure inversion error; the same is allowed with either sign
  std::vector<double> gd(v.size()), gn(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    gd[i] = 4.0 * kPi * v[i] * v[i] * df[i];
    gn[i] = 2.0 * std::max(-g[i], 0.0);
  }
  out.mass_error = std::abs(out.mass - coarse) / 3.0 + trapezoid_from_zero(v, gd) + trapezoid_from_zero(v, gn) +
                   out.truncation_error * 4.0 * kPi * vmax * vmax * vmax / 3.0;
  out.mass_ok = out.applicable && std::abs(out.mass - 1.0) <= out.mass_error;
  if (out.applicable && !out.mass_ok)
    out.note = fmt::format("mass {} differs from 1 by more than the error estimate {}", out.mass, out.mass_error);
  if (out.applicable && out.negative_lobes)
    out.note = fmt::format("negative lobe down to {} below the tolerance {}", out.min_value, -kLobe);
  return out;
}

SobolevNorm sobolev_norm(const RadialCharFn& psi, int N, double R) {
  if (N < 0) throw DomainError("sobolev_norm: order must be non-negative");
  const Samples s = sample_uniform(psi, R, std::min(0.01, R / 4000.0), 16);
  const std::size_t n = s.r.size() - 1;
  const double c = 4.0 * kPi / std::pow(2.0 * kPi, 3);
  auto g = [&](std::size_t k) {
    const double r = s.r[k];
    return std::pow(1.0 + r * r, N) * s.psi[k] * s.psi[k] * r * r;
  };
  double vals[4], radii[4];
  for (int j = 0; j < 4; ++j) {
    const std::size_t m = n >> (3 - j);
    vals[j] = c * simpson(s, m, g);
    radii[j] = s.r[m];
  }
  SobolevNorm out;
  out.value = vals[3];
  out.previous = vals[2];
  out.converged = std::abs(vals[3] - vals[2]) < 0.01 * vals[3];
  if (vals[0] > 0.0) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int j = 0; j < 4; ++j) {
      const double x = std::log(radii[j]), y = std::log(vals[j]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.growth = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
  }
  return out;
}

EntropyMoments entropy_and_moments(const DensityProfile& p, double alpha) {
  if (!p.valid())
    throw VerificationError(fmt::format("entropy_and_moments: density profile rejected ({})",
                                        p.note.empty() ? "mass check failed" : p.note));
  if (!(alpha > 0.0)) throw DomainError("entropy_and_moments: alpha must be positive");
  const std::size_t n = p.v.size();
  std::vector<double> a(n), b(n), neg(n), m(n), am(n), mass(n), noise(n), bound(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = p.v[i];
    const double f = std::max(p.f[i], 0.0);
    const double w = 4.0 * kPi * v * v;
    noise[i] = 2.0 * w * std::pow(v, alpha) * std::max(-p.f[i], 0.0);
    bound[i] = w * std::pow(v, alpha) * (p.truncation_error + p.quadrature_error);
    a[i] = w * f * std::log1p(f);
    b[i] = f > 0.0 ? w * f * std::log(f) : 0.0;
    neg[i] = f > 0.0 && f < 1.0 ? b[i] : 0.0;
    m[i] = w * std::pow(1.0 + v * v, alpha / 2.0) * f;
    am[i] = w * std::pow(v, alpha) * f;
    mass[i] = w * f;
  }
  EntropyMoments out;
  out.log1p_entropy = trapezoid_from_zero(p.v, a);
  out.entropy = trapezoid_from_zero(p.v, b);
  out.negative_part = trapezoid_from_zero(p.v, neg);
  out.moment = trapezoid_from_zero(p.v, m);
  out.abs_moment = trapezoid_from_zero(p.v, am);
  out.abs_moment_error = std::abs(out.abs_moment - trapezoid_coarse(p.v, am)) / 3.0 +
                         trapezoid_from_zero(p.v, noise) + trapezoid_from_zero(p.v, bound);
  out.clipped_mass = p.clipped_mass;

  boost::math::quadrature::exp_sinh<double> integrator;
  const double gauge = 4.0 * kPi * integrator.integrate([alpha](double v) {
    return v * v * std::exp(-std::pow(1.0 + v * v, alpha / 2.0));
  });
  out.negative_bound = gauge + out.moment;

  const double total = trapezoid_from_zero(p.v, mass);
  const double slack = 1e-12 * (1.0 + std::abs(out.entropy));
  out.consistent = out.log1p_entropy <= out.entropy - out.negative_part + total * std::numbers::ln2 + slack &&
                   -out.negative_part <= out.negative_bound + slack;
  return out;
}

double fourier_tail_sup(const RadialCharFn& psi, double R0) {
  double m = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (psi.grid()[i] >= R0) {
      m = std::max(m, std::abs(psi[i]));
      any = true;
    }
  if (!any) throw RangeError(fmt::format("fourier_tail_sup: R0 = {} beyond the grid", R0));
  return m;
}

MomentTrackReport moment_trajectory_check(const Trajectory& traj, double alpha, double alpha_prime,
                                          double lambda_alpha) {
  if (traj.snapshots.empty()) throw DomainError("moment_trajectory_check: empty trajectory");
  if (!(alpha_prime > 0.0 && alpha_prime < alpha && alpha <= 2.0))
    throw DomainError("moment_trajectory_check: need 0 < alpha' < alpha <= 2");
  MomentTrackReport rep;
  rep.constant = embedding_constant(alpha_prime, alpha, 3) / (2.0 * c_constant(alpha_prime, 3));
  const CharFn one = CharFn::unit();
  const NormResult s0 = sup_norm(CharFn::radial_grid(traj.snapshots.front()), one, alpha);
  rep.initial_sup_norm = s0.divergent ? kInf : s0.value;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    MomentTrackRow row;
    row.t = traj.times[k];
    const NormResult mu = moment_upper(CharFn::radial_grid(traj.snapshots[k]), alpha_prime);
    row.lhs = mu.divergent ? kInf : mu.value;
    row.rhs = rep.constant * std::pow(std::exp(lambda_alpha * row.t) * rep.initial_sup_norm, alpha_prime / alpha);
    row.pass = row.lhs <= row.rhs;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace bobylev
