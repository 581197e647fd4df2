#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <random>
#include <sstream>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bobylev/csv.hpp"
#include "bobylev/errors.hpp"
#include "bobylev/kernel.hpp"
#include "bobylev/metric.hpp"
#include "bobylev/physical.hpp"
#include "bobylev/solver.hpp"

namespace bobylev::cli {

namespace {

using Cell = CsvTable::Cell;

struct Output {
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::vector<std::string> failures;
};

struct Context {
  const ExperimentConfig& cfg;
  std::uint64_t seed;

  [[nodiscard]] CharFn datum(const DatumSpec& d) const { return make_datum(d, seed, cfg.base_dir); }
  [[nodiscard]] CharFn initial() const { return datum(*cfg.initial); }
  [[nodiscard]] CharFn initial_tilde() const {
    return cfg.initial_tilde ? datum(*cfg.initial_tilde) : CharFn::unit(cfg.initial ? cfg.initial->dim : 3);
  }
  [[nodiscard]] RadialCharFn sampled(const CharFn& phi) const {
    if (!phi.isotropic() || phi.dim() != 3)
      throw ConfigError(fmt::format("experiment '{}' needs an isotropic datum in three dimensions, got {}",
                                    cfg.experiment, phi.name()));
    return sample_radial(phi, RadialGrid::make(cfg.grid));
  }
};

Cell count(std::size_t n) { return static_cast<std::int64_t>(n); }
Cell flag(bool b) { return static_cast<std::int64_t>(b ? 1 : 0); }

// "inf" for divergent constants and norms, the value otherwise.
Cell value_or_inf(double value, bool divergent) {
  return divergent ? Cell(std::string("inf")) : Cell(value);
}

std::size_t snapshot_at(const Trajectory& tr, double t, const char* key) {
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    if (std::abs(tr.times[k] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  throw ConfigError(fmt::format("{} = {} is not a snapshot time (dt times snapshot_every)", key, t));
}

std::vector<Point> spot_points(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Point p{u(rng), u(rng), u(rng)};
    if (norm(p) <= 2.0) pts.push_back(p);
  }
  return pts;
}

Output constants(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto quad = make_quadrature(c.quad);
  CsvTable t({"name", "alpha", "value", "est_error"});
  const auto row = [&](const char* name, Cell alpha, const KernelConstant& k) {
    t.add({std::string(name), std::move(alpha), value_or_inf(k.value, k.divergent),
           k.divergent ? Cell(std::string()) : Cell(k.est_error)});
  };
  row("gamma2", std::string(), gamma2(c.kernel, quad));
  for (double a : c.alphas) {
    row("gamma_alpha", a, gamma_alpha(c.kernel, a, quad));
    row("lambda", a, lambda_alpha(c.kernel, a, quad));
    row("kernel_factor", a, kernel_factor(c.kernel, a, quad));
    if (a < 2.0) t.add({std::string("c_inf"), a, c_constant(a, 3), 0.0});
  }
  Output out;
  out.tables.emplace_back("constants.csv", std::move(t));
  return out;
}

void norm_row(CsvTable& t, const char* name, double alpha, double beta, const NormResult& n) {
  t.add({std::string(name), alpha, beta, value_or_inf(n.value, n.divergent),
         value_or_inf(n.estimate(), n.divergent), n.tail_bound, n.est_error, flag(n.divergent), n.growth});
}

Output norms(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto phi = ctx.initial();
  const auto tilde = ctx.initial_tilde();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CsvTable t({"quantity", "alpha", "beta", "value", "estimate", "tail_bound", "est_error", "divergent", "growth"});
  norm_row(t, "sup_norm", c.alpha, nan, sup_norm(phi, tilde, c.alpha));
  norm_row(t, "sup_norm", c.beta, nan, sup_norm(phi, tilde, c.beta));
  norm_row(t, "m_norm", c.alpha, nan, m_norm(phi, tilde, c.alpha));
  norm_row(t, "dis_ab", c.alpha, c.beta, dis_ab(phi, tilde, c.alpha, c.beta));
  Output out;
  if (!c.initial_tilde && c.beta > c.alpha) {
    const auto e = embedding_check(phi, c.alpha, c.beta);
    t.add({std::string("embedding_lhs"), c.alpha, c.beta, value_or_inf(e.lhs, e.lhs_divergent),
           value_or_inf(e.lhs, e.lhs_divergent), nan, nan, flag(e.lhs_divergent), std::string()});
    t.add({std::string("embedding_rhs"), c.alpha, c.beta, e.rhs, e.rhs, nan, nan, flag(false), std::string()});
    t.add({std::string("embedding_constant"), c.alpha, c.beta, e.constant, e.constant, nan, nan, flag(false),
           std::string()});
    if (std::isfinite(e.rhs) && !e.holds)
      out.failures.push_back(fmt::format("embedding bound fails: {} > {}", e.lhs, e.rhs));
  }
  out.tables.emplace_back("norms.csv", std::move(t));
  return out;
}

Output moments(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto phi = ctx.initial();
  const int dim = phi.dim();
  const auto* atoms = std::get_if<CharFn::Discrete>(&phi.variant());
  const bool centred = !atoms || atoms->measure.mean_zero(1e-9);
  CsvTable t({"quantity", "alpha", "value", "est_error"});
  Output out;
  for (double a : c.alphas) {
    const auto exact = moment_exact(phi, a);
    const auto upper = moment_upper(phi, a);
    const auto sup = sup_norm(phi, CharFn::unit(dim), a);
    const auto sw = sandwich_constants(a, dim);
    const double tail = tail_moment_bound(phi, a, c.tail_radius);
    t.add({std::string("moment_exact"), a, value_or_inf(exact.estimate(), exact.divergent), exact.est_error});
    t.add({std::string("moment_upper"), a, value_or_inf(upper.estimate(), upper.divergent), upper.est_error});
    t.add({std::string("sup_norm"), a, value_or_inf(sup.value, sup.divergent), sup.est_error});
    t.add({std::string("C1"), a, sw.C1, 0.0});
    t.add({std::string("C2"), a, sw.C2, 0.0});
    t.add({std::string("tail_moment_bound"), a, tail, 0.0});
    if (atoms) {
      t.add({std::string("atom_sum"), a, atoms->measure.moment(a), 0.0});
      t.add({std::string("atom_tail_sum"), a, atoms->measure.tail_moment(a, c.tail_radius), 0.0});
      if (atoms->measure.tail_moment(a, c.tail_radius) > tail * (1.0 + 1e-6))
        out.failures.push_back(fmt::format("tail moment bound fails at alpha = {}", a));
    }
    // ‖φ − 1‖_α <= C1 m_α needs a centred law above α = 1.
    if (exact.divergent || (a > 1.0 && !centred)) continue;
    const double m = exact.estimate();
    const double slack = 1e-6 * m + exact.est_error;
    if (!sup.divergent && sup.value > sw.C1 * (m + slack))
      out.failures.push_back(fmt::format("sup norm exceeds C1 m_alpha at alpha = {}", a));
    if (!upper.divergent && m > upper.estimate() + slack + upper.est_error)
      out.failures.push_back(fmt::format("moment exceeds its upper bracket at alpha = {}", a));
  }
  out.tables.emplace_back("moments.csv", std::move(t));
  return out;
}

Output evolve_run(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto tr = evolve(ctx.sampled(ctx.initial()), c.solver());
  const auto pts = spot_points(ctx.seed, c.spot_points);

  CsvTable traj({"t", "r", "psi"});
  CsvTable diag({"t", "mass", "max_modulus", "sup_norm", "m_norm", "moment_upper", "bochner_min"});
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& s = tr.snapshots[k];
    for (std::size_t i = 0; i < s.size(); ++i) traj.add({tr.times[k], s.grid()[i], s[i]});
    const auto& d = tr.diagnostics[k];
    diag.add({d.t, d.mass, d.max_modulus, d.sup_norm, d.m_norm, d.moment_upper,
              bochner_spotcheck(CharFn::radial_grid(s), pts)});
  }
  CsvTable steps({"t", "iterations", "tau_intervals", "substeps", "contraction", "bound"});
  for (const auto& st : tr.steps)
    steps.add({st.t, static_cast<std::int64_t>(st.iterations), static_cast<std::int64_t>(st.tau_intervals),
               static_cast<std::int64_t>(st.substeps), st.contraction, st.bound});
  Output out;
  out.tables.emplace_back("trajectory.csv", std::move(traj));
  out.tables.emplace_back("diagnostics.csv", std::move(diag));
  out.tables.emplace_back("steps.csv", std::move(steps));
  return out;
}

Output cutoff_study(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto st = cutoff_sequence_study(ctx.sampled(ctx.initial()), c.solver(), c.cutoffs, c.direct);
  CsvTable t({"quantity", "n_a", "n_b", "value"});
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < st.cutoffs.size(); ++i)
    for (std::size_t j = i + 1; j < st.cutoffs.size(); ++j)
      t.add({std::string("distance"), st.cutoffs[i], st.cutoffs[j], st.distances[i][j]});
  for (std::size_t i = 0; i < st.successive.size(); ++i)
    t.add({std::string("successive"), st.cutoffs[i], st.cutoffs[i + 1], st.successive[i]});
  t.add({std::string("dt"), inf, inf, st.dt});
  Output out;
  if (st.has_direct) {
    t.add({std::string("direct_distance"), st.cutoffs.back(), inf, st.direct_distance});
    t.add({std::string("integrator_tolerance"), inf, inf, st.integrator_tolerance});
    if (!st.direct_agrees)
      out.failures.push_back(fmt::format("largest cutoff differs from the direct route by {} (tolerance {})",
                                         st.direct_distance, st.integrator_tolerance));
  }
  if (!st.monotone) out.failures.push_back("successive cutoff distances do not decrease");
  out.tables.emplace_back("cutoff_study.csv", std::move(t));
  return out;
}

Output stability(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto rep = verify_stability(ctx.sampled(ctx.initial()), ctx.sampled(ctx.initial_tilde()), c.solver(),
                                    c.tolerance);
  CsvTable t({"t", "m_lhs", "m_rhs", "m_ratio", "sup_lhs", "sup_rhs", "sup_ratio"});
  for (const auto& r : rep.rows) t.add({r.t, r.m_lhs, r.m_rhs, r.m_ratio, r.sup_lhs, r.sup_rhs, r.sup_ratio});
  Output out;
  if (!rep.pass)
    out.failures.push_back(fmt::format("stability ratio above 1 + {} first at t = {} (max m {}, max sup {})",
                                       c.tolerance, rep.first_failure, rep.max_m_ratio, rep.max_sup_ratio));
  out.tables.emplace_back("stability.csv", std::move(t));
  return out;
}

Output continuity(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto tr = evolve(ctx.sampled(ctx.initial()), c.solver());
  const auto rep = verify_continuity(tr, c.alpha, tr.lambda_alpha);
  CsvTable pairs({"t_a", "t_b", "lipschitz"});
  for (std::size_t k = 0; k < rep.lipschitz.size(); ++k)
    pairs.add({tr.times[k], tr.times[k + 1], rep.lipschitz[k]});
  CsvTable sum({"quantity", "value"});
  sum.add({std::string("constant"), rep.constant});
  sum.add({std::string("max_increment"), rep.max_increment});
  sum.add({std::string("initial_distance"), rep.initial_distance});
  sum.add({std::string("lambda_alpha"), tr.lambda_alpha});
  sum.add({std::string("pairs"), count(rep.pairs)});
  Output out;
  if (!rep.finite) out.failures.push_back("time-continuity constant is not finite");
  out.tables.emplace_back("continuity.csv", std::move(pairs));
  out.tables.emplace_back("continuity_summary.csv", std::move(sum));
  return out;
}

Output smoothing(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& s = c.smoothing;
  const auto tr = evolve(ctx.sampled(ctx.initial()), c.solver());
  const std::size_t probe = snapshot_at(tr, s.probe_time, "smoothing.probe_time");
  const std::size_t early = snapshot_at(tr, s.early_time, "smoothing.early_time");
  const std::size_t last = tr.snapshots.size() - 1;
  const auto v = speed_grid(s.v_max, static_cast<std::size_t>(s.speeds));
  const double nan = std::numeric_limits<double>::quiet_NaN();

  CsvTable sob({"t", "N", "value", "previous", "converged", "growth"});
  CsvTable tails({"t", "tail_sup"});
  CsvTable phys({"t", "valid", "mass", "mass_error", "entropy", "log1p_entropy", "negative_part", "moment",
                 "abs_moment", "consistent"});
  Output out;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const auto& psi = tr.snapshots[k];
    const double t = tr.times[k];
    for (int N : s.orders) {
      const auto h = sobolev_norm(psi, N, s.R);
      sob.add({t, static_cast<std::int64_t>(N), h.value, h.previous, flag(h.converged), h.growth});
      if (k == probe && !h.converged)
        out.failures.push_back(fmt::format("H^{} norm not converged at t = {}", N, t));
    }
    tails.add({t, fourier_tail_sup(psi, s.tail_radius)});
    const auto p = inverse_transform(psi, v, s.R);
    if (p.valid()) {
      const auto e = entropy_and_moments(p, c.alpha);
      phys.add({t, flag(true), p.mass, p.mass_error, e.entropy, e.log1p_entropy, e.negative_part, e.moment,
                e.abs_moment, flag(e.consistent)});
    } else {
      phys.add({t, flag(false), p.mass, p.mass_error, nan, nan, nan, nan, nan, flag(false)});
    }
  }
  const double tail_early = fourier_tail_sup(tr.snapshots[early], s.tail_radius);
  const double tail_last = fourier_tail_sup(tr.snapshots[last], s.tail_radius);
  if (!(tail_last < tail_early))
    out.failures.push_back(fmt::format("Fourier tail did not shrink: {} at t = {} vs {} at t = {}", tail_last,
                                       tr.times[last], tail_early, tr.times[early]));

  CsvTable density({"v", "f"});
  const auto p = inverse_transform(tr.snapshots[last], v, s.R);
  if (p.valid())
    for (std::size_t i = 0; i < p.v.size(); ++i) density.add({p.v[i], p.f[i]});
  out.tables.emplace_back("sobolev.csv", std::move(sob));
  out.tables.emplace_back("fourier_tail.csv", std::move(tails));
  out.tables.emplace_back("entropy.csv", std::move(phys));
  out.tables.emplace_back("density.csv", std::move(density));
  return out;
}

Output moment_track(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto tr = evolve(ctx.sampled(ctx.initial()), c.solver());
  const auto rep = moment_trajectory_check(tr, c.alpha, c.alpha_prime, tr.lambda_alpha);
  CsvTable t({"t", "lhs", "rhs", "pass"});
  for (const auto& r : rep.rows) t.add({r.t, r.lhs, r.rhs, flag(r.pass)});
  Output out;
  for (const auto& r : rep.rows)
    if (!r.pass) out.failures.push_back(fmt::format("moment bound fails at t = {}: {} > {}", r.t, r.lhs, r.rhs));
  out.tables.emplace_back("moment_track.csv", std::move(t));
  return out;
}

struct Entry {
  ExperimentInfo info;
  Output (*fn)(const Context&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e{
        {{"constants", "kernel constants gamma2, gamma_alpha, lambda_alpha, kernel factor and c_alpha", false,
          false},
         constants},
        {{"norms", "sup, M^alpha and dis_ab distances of a datum to 1 or to a second datum", true, false}, norms},
        {{"moments", "moment extraction, sandwich constants and tail bounds of a datum", true, false}, moments},
        {{"evolve", "time evolution with per-snapshot diagnostics", true, false}, evolve_run},
        {{"cutoff-study", "evolution under increasing angular cutoffs against the non-cutoff route", true, false},
         cutoff_study},
        {{"verify-stability", "stability envelopes of two evolving data in the M^alpha and sup norms", true, true},
         stability},
        {{"verify-continuity", "time-Lipschitz constant of a trajectory in dis_{alpha,alpha}", true, false},
         continuity},
        {{"verify-smoothing", "Sobolev norms, Fourier tail, density and entropy along a non-cutoff run", true,
          false},
         smoothing},
        {{"moment-track", "moment bound along a trajectory", true, false}, moment_track},
    };
    std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.info.name < b.info.name; });
    return e;
  }();
  return entries;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

}  // namespace

const std::vector<ExperimentInfo>& list_experiments() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

const ExperimentInfo* find_experiment(std::string_view name) {
  for (const auto& i : list_experiments())
    if (i.name == name) return &i;
  return nullptr;
}

std::string format_listing() {
  std::string out;
  for (const auto& i : list_experiments()) out += fmt::format("{:<18} {}\n", i.name, i.description);
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult res;
  res.out_dir = opt.out.value_or(std::filesystem::path(cfg.output));
  const std::uint64_t seed = opt.seed.value_or(cfg.seed);
#ifdef _OPENMP
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
#endif

  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  try {
    const auto it = std::find_if(registry().begin(), registry().end(),
                                 [&](const Entry& e) { return e.info.name == cfg.experiment; });
    if (it == registry().end()) throw ConfigError(fmt::format("unknown experiment '{}'", cfg.experiment));
    const Context ctx{cfg, seed};
    auto out = it->fn(ctx);
    std::filesystem::create_directories(res.out_dir);
    for (const auto& [name, table] : out.tables) {
      const auto path = res.out_dir / name;
      table.write(path.string());
      res.artifacts.push_back(path);
    }
    for (const auto& f : out.failures) checks.push_back(f);
    if (!out.failures.empty()) {
      res.exit_code = kVerificationError;
      res.message = fmt::format("verification failed: {}", out.failures.front());
    }
  } catch (const ConfigError& e) {
    res = {kConfigError, e.what(), res.out_dir, {}};
  } catch (const DomainError& e) {
    res = {kConfigError, e.what(), res.out_dir, {}};
  } catch (const VariantError& e) {
    res = {kConfigError, e.what(), res.out_dir, {}};
  } catch (const RangeError& e) {
    res = {kConfigError, e.what(), res.out_dir, {}};
  } catch (const VerificationError& e) {
    res.exit_code = kVerificationError;
    res.message = e.what();
  } catch (const Error& e) {
    res.exit_code = kAccuracyError;
    res.message = e.what();
  } catch (const std::exception& e) {
    res.exit_code = kFailure;
    res.message = e.what();
  }

  try {
    std::filesystem::create_directories(res.out_dir);
    nlohmann::ordered_json m;
    m["experiment"] = cfg.experiment;
    m["config"] = cfg.source;
    m["seed"] = seed;
    m["threads"] = opt.threads;
    m["exit_code"] = res.exit_code;
    m["message"] = res.message;
    m["failures"] = checks;
    m["created"] = utc_now();
    auto& arts = m["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& p : res.artifacts) {
      const auto bytes = read_file(p);
      arts.push_back({{"file", p.filename().string()}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    const auto path = res.out_dir / "manifest.json";
    std::ofstream f(path, std::ios::binary);
    f << m.dump(2) << '\n';
    if (!f) throw Error(fmt::format("cannot write {}", path.string()));
    res.artifacts.push_back(path);
  } catch (const std::exception& e) {
    if (res.exit_code == kSuccess) {
      res.exit_code = kFailure;
      res.message = e.what();
    }
  }
  return res;
}

}  // namespace bobylev::cli
