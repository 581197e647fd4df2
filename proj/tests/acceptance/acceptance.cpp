// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <deque>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bobylev/charfun.hpp"
#include "bobylev/kernel.hpp"
#include "bobylev/metric.hpp"
#include "bobylev/physical.hpp"
#include "bobylev/solver.hpp"
#include "config.hpp"
#include "experiments.hpp"

using namespace bobylev;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass;
  std::string detail;
};

std::shared_ptr<const RadialGrid> grid512() {
  static const auto g = RadialGrid::make({});
  return g;
}

RadialCharFn sampled(const CharFn& f) { return sample_radial(f, grid512()); }

SolverConfig config(const KernelSpec& k, double T, double dt) {
  SolverConfig c;
  c.kernel = k;
  c.T = T;
  c.dt = dt;
  c.alpha = 1.0;
  c.integrator = k.bounded() ? Integrator::duhamel_picard : Integrator::exponential_euler;
  return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Every trajectory produced by the suite, for the per-snapshot and per-step
// criteria.
struct Runs {
  std::deque<std::pair<std::string, Trajectory>> all;  // stable references
  const Trajectory& add(std::string name, Trajectory t) {
    all.emplace_back(std::move(name), std::move(t));
    return all.back().second;
  }
};

Runs& runs() {
  static Runs r;
  return r;
}

// The two stability pairs over T = 0.5, Δt = 0.01.
struct Pair {
  std::string name;
  const Trajectory* a;
  const Trajectory* b;
};

const std::vector<Pair>& stability_pairs() {
  static const std::vector<Pair> pairs = [] {
    const auto bounded = config(KernelSpec::constant(1.0), 0.5, 0.01);
    const auto singular = config(KernelSpec::singular(0.25), 0.5, 0.01);
    std::vector<Pair> p;
    const auto& a1 = runs().add("gaussian(1), b=1", evolve(sampled(CharFn::gaussian(1.0)), bounded));
    const auto& b1 = runs().add("gaussian(1.1), b=1", evolve(sampled(CharFn::gaussian(1.1)), bounded));
    p.push_back({"gaussian(1)/gaussian(1.1) b=1", &a1, &b1});
    const auto& a2 = runs().add("sphere(1), s=1/4", evolve(sampled(CharFn::uniform_sphere(1.0)), singular));
    const auto& b2 = runs().add("gaussian(1), s=1/4", evolve(sampled(CharFn::gaussian(1.0)), singular));
    p.push_back({"sphere(1)/gaussian(1) s=1/4", &a2, &b2});
    return p;
  }();
  return pairs;
}

const CutoffStudy& cutoff_study() {
  static const CutoffStudy st = [] {
    auto base = config(KernelSpec::singular(0.25), 0.25, 0.01);
    auto s = cutoff_sequence_study(sampled(CharFn::uniform_sphere(1.0)), base, {4, 16, 64, 256}, true);
    for (std::size_t i = 0; i < s.runs.size(); ++i)
      runs().add(fmt::format("sphere(1), cutoff {}", s.cutoffs[i]), s.runs[i]);
    return s;
  }();
  return st;
}

double max_gaussian_deviation(const Trajectory& tr) {
  double m = 0.0;
  for (const auto& s : tr.snapshots)
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = s.grid()[i];
      m = std::max(m, std::abs(s[i] - std::exp(-0.5 * r * r)));
    }
  return m;
}

Verdict constants() {
  const auto q = make_quadrature({});
  const auto one = KernelSpec::constant(1.0);
  const double l2a = std::abs(lambda_alpha(one, 2.0, q).value);
  const double l2b = std::abs(lambda_alpha(KernelSpec::singular(0.25), 2.0, q).value);
  const double l1 = std::abs(lambda_alpha(one, 1.0, q).value - 2.0 * kPi / 3.0);
  const double g2 = std::abs(gamma2(one, q).value - 2.0 * kPi);
  return {l2a <= 1e-12 && l2b <= 1e-12 && l1 <= 1e-8 && g2 <= 1e-10,
          fmt::format("|lambda2| = {:.1e}, {:.1e}; |lambda1 - 2pi/3| = {:.1e}; |gamma2 - 2pi| = {:.1e}", l2a, l2b,
                      l1, g2)};
}

Verdict moment_extraction() {
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = random_mean_zero_measure(seed, 3, 8, 10.0);
    const auto phi = CharFn::discrete(m);
    for (double a : {0.3, 0.5, 1.0, 1.5, 1.9}) {
      const double e = rel(moment_exact(phi, a).value, m.moment(a));
      if (e > worst) {
        worst = e;
        where = fmt::format("seed {}, alpha {}", seed, a);
      }
    }
  }
  return {worst <= 1e-4, fmt::format("250 cases, worst relative error {:.2e} ({})", worst, where)};
}

Verdict norm_fixtures() {
  const auto g = CharFn::gaussian(1.0);
  const double m = rel(m_norm(g, CharFn::unit(), 1.0).estimate(), 4.0 * kPi * std::sqrt(kPi / 2.0));
  const double u = std::abs(moment_upper(g, 1.0).estimate() - 2.0 * std::sqrt(2.0 / kPi));
  return {m <= 1e-5 && u <= 1e-4, fmt::format("M^1 norm rel. error {:.1e}; moment_upper error {:.1e}", m, u)};
}

Verdict strict_inclusion() {
  const double eps[3] = {1e-2, 1e-3, 1e-4};
  double x[3], y[3];
  for (int i = 0; i < 3; ++i) {
    IntegralOptions o;
    o.eps = eps[i];
    x[i] = std::log(1.0 / eps[i]);
    y[i] = m_norm(CharFn::stable(1.0), CharFn::unit(), 1.0, o).value;
  }
  const double xm = (x[0] + x[1] + x[2]) / 3.0, ym = (y[0] + y[1] + y[2]) / 3.0;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  const double slope = sxy / sxx;
  const double sup = sup_norm(CharFn::stable(1.0), CharFn::unit(), 1.0).value;
  return {rel(slope, 4.0 * kPi) <= 0.05 && sup <= 1.0,
          fmt::format("slope {:.5f} vs 4pi = {:.5f} ({:.2f}%); sup norm {:.6f}", slope, 4.0 * kPi,
                      100.0 * rel(slope, 4.0 * kPi), sup)};
}

Verdict gaussian_stationarity() {
  const auto& d = runs().add("gaussian(1), b=1, T=1",
                             duhamel_evolve(sampled(CharFn::gaussian(1.0)), config(KernelSpec::constant(1.0), 1.0, 0.05)));
  const auto& n = runs().add("gaussian(1), s=1/4, T=0.5",
                             evolve_noncutoff(sampled(CharFn::gaussian(1.0)), config(KernelSpec::singular(0.25), 0.5, 0.01)));
  const double ed = max_gaussian_deviation(d), en = max_gaussian_deviation(n);
  return {ed <= 1e-6 && en <= 5e-6, fmt::format("cutoff {:.2e} (<= 1e-6), non-cutoff {:.2e} (<= 5e-6)", ed, en)};
}

Verdict contraction() {
  std::size_t steps = 0, resolved = 0;
  double worst = 0.0;
  bool ok = true;
  for (const auto& [name, tr] : runs().all)
    for (const auto& s : tr.steps) {
      if (s.bound == 0.0) continue;  // exponential steps carry no Picard guard
      ++steps;
      if (s.contraction > 0.0) ++resolved;
      worst = std::max(worst, s.contraction / s.bound);
      ok = ok && s.contraction <= s.bound;
    }
  return {ok && steps > 0, fmt::format("{} cutoff steps ({} with a measured ratio), max contraction/bound {:.3f}",
                                       steps, resolved, worst)};
}

Verdict stability() {
  std::string detail;
  bool ok = true;
  for (const auto& p : stability_pairs()) {
    const auto rep = stability_ratios(*p.a, *p.b, 1.0, p.a->lambda_alpha, 0.05);
    const bool pass = rep.max_m_ratio <= 1.05 && rep.max_sup_ratio <= 1.05;
    ok = ok && pass;
    detail += fmt::format("{}{}: M {:.4f}, sup {:.4f}", detail.empty() ? "" : "; ", p.name, rep.max_m_ratio,
                          rep.max_sup_ratio);
  }
  return {ok, detail};
}

Verdict mass_and_modulus() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts;
  while (pts.size() < 16) {
    const Point p{u(rng), u(rng), u(rng)};
    if (norm(p) <= 2.0) pts.push_back(p);
  }
  std::size_t count = 0;
  double mass = 0.0, modulus = 0.0, eig = std::numeric_limits<double>::infinity();
  for (const auto& [name, tr] : runs().all)
    for (const auto& s : tr.snapshots) {
      ++count;
      mass = std::max(mass, std::abs(s[0] - 1.0));
      modulus = std::max(modulus, s.max_modulus());
      eig = std::min(eig, bochner_spotcheck(CharFn::radial_grid(s), pts));
    }
  return {count > 0 && mass <= 1e-12 && modulus <= 1.0 + 1e-10 && eig >= -1e-8,
          fmt::format("{} snapshots: max |psi(0) - 1| = {:.1e}, max |psi| - 1 = {:.1e}, min eigenvalue {:.1e}", count,
                      mass, modulus - 1.0, eig)};
}

Verdict smoothing() {
  auto c = config(KernelSpec::singular(0.25), 0.2, 0.01);
  c.snapshot_every = 5;
  const auto& tr = runs().add("sphere(1), s=1/4, T=0.2", evolve_noncutoff(sampled(CharFn::uniform_sphere(1.0)), c));
  const auto at = [&](double t) {
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      if (std::abs(tr.times[k] - t) < 1e-9) return k;
    return tr.times.size();
  };
  const auto k05 = at(0.05), k1 = at(0.1), k2 = at(0.2);
  if (k05 == tr.times.size() || k1 == tr.times.size() || k2 == tr.times.size())
    return {false, "snapshot times missing"};
  const auto h0 = sobolev_norm(tr.snapshots[0], 2, 64.0);
  // ∫ ⟨r⟩^{2N} |sin r / r|² r² dr grows like R^{2N+1}: 5 for N = 2.
  const bool rough = !h0.converged && std::abs(h0.growth - 5.0) <= 0.25;
  bool smooth = true;
  for (int N = 1; N <= 4; ++N) smooth = smooth && sobolev_norm(tr.snapshots[k1], N, 64.0).converged;
  const double t05 = fourier_tail_sup(tr.snapshots[k05], 20.0), t2 = fourier_tail_sup(tr.snapshots[k2], 20.0);
  return {rough && smooth && t2 < t05,
          fmt::format("t=0: H^2 converged={} growth {:.3f} (expected 2N+1 = 5); t=0.1: H^1..H^4 converged={}; "
                      "tail sup {:.2e} (t=0.2) < {:.2e} (t=0.05)",
                      h0.converged, h0.growth, smooth, t2, t05)};
}

Verdict cutoff_limit() {
  const auto& st = cutoff_study();
  std::string succ;
  for (double d : st.successive) succ += fmt::format("{}{:.3e}", succ.empty() ? "" : ", ", d);
  return {st.monotone && st.direct_agrees,
          fmt::format("successive [{}]; n=256 vs direct {:.3e} <= 10 x {:.3e}", succ, st.direct_distance,
                      st.integrator_tolerance)};
}

Verdict moment_propagation() {
  bool ok = true;
  double worst = 0.0;
  std::size_t checked = 0;
  for (const auto& p : stability_pairs())
    for (const auto* tr : {p.a, p.b}) {
      const auto rep = moment_trajectory_check(*tr, 1.0, 0.5, tr->lambda_alpha);
      ok = ok && rep.pass;
      for (const auto& r : rep.rows) {
        ++checked;
        if (r.rhs > 0.0) worst = std::max(worst, r.lhs / r.rhs);
      }
    }
  return {ok, fmt::format("{} snapshots, max lhs/rhs {:.3f}", checked, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  const auto root = fs::temp_directory_path() / "bobylev_acceptance";
  fs::remove_all(root);
  const std::vector<std::string> configs{
      R"({"experiment": "evolve", "kernel": {"type": "singular", "s": 0.25},
          "initial": {"type": "uniform_sphere"}, "T": 0.05, "dt": 0.01})",
      R"({"experiment": "moments", "initial": {"type": "random"}, "alphas": [0.5, 1.5]})",
      R"({"experiment": "verify-smoothing", "kernel": {"type": "singular", "s": 0.25},
          "initial": {"type": "uniform_sphere"}, "T": 0.1, "dt": 0.01, "snapshot_every": 5,
          "smoothing": {"probe_time": 0.1, "early_time": 0.05, "speeds": 300}})",
  };
  std::size_t files = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto cfg = cli::parse_config(configs[i]);
    std::vector<std::vector<fs::path>> outs;
    for (const auto& [tag, threads] : std::vector<std::pair<std::string, int>>{{"a", 1}, {"b", 1}, {"c", 8}}) {
      const auto res = cli::run(cfg, {root / fmt::format("{}{}", i, tag), 42, threads});
      if (res.exit_code != cli::kSuccess) return {false, fmt::format("{} failed: {}", cfg.experiment, res.message)};
      std::vector<fs::path> csv;
      for (const auto& p : res.artifacts)
        if (p.extension() == ".csv") csv.push_back(p);
      outs.push_back(csv);
    }
    for (std::size_t k = 0; k < outs[0].size(); ++k) {
      const auto ref = slurp(outs[0][k]);
      if (ref != slurp(outs[1][k]) || ref != slurp(outs[2][k]))
        return {false, fmt::format("{} differs", outs[0][k].filename().string())};
      ++files;
    }
  }
  fs::remove_all(root);
  return {true, fmt::format("{} CSV files identical across repeated runs and 1 vs 8 threads", files)};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    std::string name;
    std::function<Verdict()> fn;
  };
  // Criteria 6 and 8 inspect every trajectory, so they run after the ones
  // that produce trajectories.
  const std::vector<Criterion> criteria{
      {1, "constants", constants},
      {2, "moment extraction", moment_extraction},
      {3, "norm fixtures", norm_fixtures},
      {4, "strict inclusion witness", strict_inclusion},
      {5, "gaussian stationarity", gaussian_stationarity},
      {7, "stability envelopes", stability},
      {9, "smoothing", smoothing},
      {10, "cutoff limit", cutoff_limit},
      {11, "moment propagation", moment_propagation},
      {6, "picard contraction", contraction},
      {8, "mass and modulus", mass_and_modulus},
      {12, "reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.fn();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("{:>2}. {} {}: {} [{:.1f}s]\n", c.number, v.pass ? "PASS" : "FAIL", c.name, v.detail, secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
