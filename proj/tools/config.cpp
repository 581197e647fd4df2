#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <set>
#include <sstream>

#include "bobylev/errors.hpp"
#include "experiments.hpp"

namespace bobylev::cli {

using nlohmann::json;

namespace {

struct Cursor {
  int line = 1;
  int last_line = 1;  // line of the last non-blank character consumed
};

// Input iterator over the document that tracks line numbers as the lexer
// consumes characters.
class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* p, Cursor* c) : p_(p), c_(c) {}
  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    if (*p_ == '\n') {
      ++c_->line;
    } else if (*p_ != ' ' && *p_ != '\t' && *p_ != '\r') {
      c_->last_line = c_->line;
    }
    ++p_;
    return *this;
  }
  CountingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }

 private:
  const char* p_ = nullptr;
  Cursor* c_ = nullptr;
};

using LineMap = std::map<std::string, int>;

// DOM builder that also records the line of every value and rejects
// duplicate keys.
class LineSax {
 public:
  LineSax(json& root, const Cursor& cur, LineMap& lines, std::string source)
      : dom_(root, true), cur_(cur), lines_(lines), source_(std::move(source)) {}

  bool null() { return scalar(dom_.null()); }
  bool boolean(bool v) { return scalar(dom_.boolean(v)); }
  bool number_integer(json::number_integer_t v) { return scalar(dom_.number_integer(v)); }
  bool number_unsigned(json::number_unsigned_t v) { return scalar(dom_.number_unsigned(v)); }
  bool number_float(json::number_float_t v, const json::string_t& s) {
    return scalar(dom_.number_float(v, s));
  }
  bool string(json::string_t& v) { return scalar(dom_.string(v)); }
  bool binary(json::binary_t& v) { return scalar(dom_.binary(v)); }

  bool start_object(std::size_t n) {
    record();
    frames_.push_back({false, {}, 0, {}});
    return dom_.start_object(n);
  }
  bool key(json::string_t& k) {
    auto& f = frames_.back();
    if (!f.seen.insert(k).second)
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", source_, cur_.last_line, k));
    f.key = k;
    return dom_.key(k);
  }
  bool end_object() {
    frames_.pop_back();
    advance();
    return dom_.end_object();
  }
  bool start_array(std::size_t n) {
    record();
    frames_.push_back({true, {}, 0, {}});
    return dom_.start_array(n);
  }
  bool end_array() {
    frames_.pop_back();
    advance();
    return dom_.end_array();
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
    std::string msg = ex.what();
    if (const auto p = msg.find("column"); p != std::string::npos) {
      if (const auto q = msg.find(": ", p); q != std::string::npos) msg = msg.substr(q + 2);
    } else if (const auto q = msg.find("] "); q != std::string::npos) {
      msg = msg.substr(q + 2);
    }
    throw ConfigError(fmt::format("{}:{}: syntax error: {}", source_, cur_.line, msg));
  }

 private:
  struct Frame {
    bool array;
    std::string key;
    std::size_t index;
    std::set<std::string> seen;
  };

  std::string here() const {
    std::string p;
    for (const auto& f : frames_) p += "/" + (f.array ? std::to_string(f.index) : f.key);
    return p;
  }
  void record() { lines_[here()] = cur_.last_line; }
  void advance() {
    if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
  }
  bool scalar(bool ok) {
    record();
    advance();
    return ok;
  }

  nlohmann::detail::json_sax_dom_parser<json> dom_;
  const Cursor& cur_;
  LineMap& lines_;
  std::string source_;
  std::vector<Frame> frames_;
};

// Typed accessors over a parsed document that report errors at the line of
// the offending value.
class Reader {
 public:
  Reader(const json& root, const LineMap& lines, std::string source)
      : root_(root), lines_(lines), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
    throw ConfigError(fmt::format("{}:{}: {}", source_, line(ptr), msg));
  }

  int line(std::string ptr) const {
    while (true) {
      if (auto it = lines_.find(ptr); it != lines_.end()) return it->second;
      if (ptr.empty()) return 1;
      ptr = ptr.substr(0, ptr.rfind('/'));
    }
  }

  static std::string name(const std::string& ptr) { return ptr.empty() ? "document" : ptr.substr(1); }

  const json& at(const std::string& ptr) const { return root_.at(json::json_pointer(ptr)); }

  void object(const std::string& ptr, std::initializer_list<const char*> allowed) const {
    const auto& j = at(ptr);
    if (!j.is_object()) fail(ptr, fmt::format("{} must be an object", name(ptr)));
    for (const auto& [k, v] : j.items()) {
      (void)v;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
        fail(ptr + "/" + k, fmt::format("unknown key '{}' in {}", k, name(ptr)));
    }
  }

  bool has(const std::string& ptr, const char* key) const { return at(ptr).contains(key); }

  double number(const std::string& ptr, double lo, double hi, bool lo_open, bool hi_open) const {
    const auto& j = at(ptr);
    if (!j.is_number()) fail(ptr, fmt::format("{} must be a number", name(ptr)));
    const double x = j.get<double>();
    const bool ok = std::isfinite(x) && (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
    if (!ok)
      fail(ptr, fmt::format("{} = {} outside {}{}, {}{}", name(ptr), x, lo_open ? '(' : '[', lo, hi,
                            hi_open ? ')' : ']'));
    return x;
  }

  long long integer(const std::string& ptr, long long lo, long long hi) const {
    const auto& j = at(ptr);
    if (!j.is_number_integer()) fail(ptr, fmt::format("{} must be an integer", name(ptr)));
    const auto x = j.get<long long>();
    if (x < lo || x > hi) fail(ptr, fmt::format("{} = {} outside [{}, {}]", name(ptr), x, lo, hi));
    return x;
  }

  std::uint64_t unsigned_integer(const std::string& ptr) const {
    const auto& j = at(ptr);
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
      fail(ptr, fmt::format("{} must be a non-negative integer", name(ptr)));
    return j.get<std::uint64_t>();
  }

  std::string text(const std::string& ptr) const {
    const auto& j = at(ptr);
    if (!j.is_string()) fail(ptr, fmt::format("{} must be a string", name(ptr)));
    return j.get<std::string>();
  }

  std::string choice(const std::string& ptr, std::initializer_list<const char*> options) const {
    const auto s = text(ptr);
    if (std::none_of(options.begin(), options.end(), [&](const char* o) { return s == o; })) {
      std::string list;
      for (const char* o : options) list += (list.empty() ? "" : ", ") + std::string(o);
      fail(ptr, fmt::format("{} = '{}' is not one of: {}", name(ptr), s, list));
    }
    return s;
  }

  bool boolean(const std::string& ptr) const {
    const auto& j = at(ptr);
    if (!j.is_boolean()) fail(ptr, fmt::format("{} must be true or false", name(ptr)));
    return j.get<bool>();
  }

  std::size_t array(const std::string& ptr, std::size_t min_size) const {
    const auto& j = at(ptr);
    if (!j.is_array()) fail(ptr, fmt::format("{} must be an array", name(ptr)));
    if (j.size() < min_size) fail(ptr, fmt::format("{} needs at least {} entries", name(ptr), min_size));
    return j.size();
  }

 private:
  const json& root_;
  const LineMap& lines_;
  std::string source_;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string sub(const std::string& ptr, const char* key) { return ptr + "/" + key; }
std::string sub(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

KernelSpec read_kernel(const Reader& r, const std::string& p) {
  r.object(p, {"type", "b0", "s", "K", "cutoff"});
  if (!r.has(p, "type")) r.fail(p, "kernel needs a 'type'");
  const auto type = r.choice(sub(p, "type"), {"constant", "singular"});
  KernelSpec k;
  if (type == "constant") {
    for (const char* key : {"s", "K"})
      if (r.has(p, key)) r.fail(sub(p, key), fmt::format("key '{}' applies to singular kernels only", key));
    k = KernelSpec::constant(r.has(p, "b0") ? r.number(sub(p, "b0"), 0, kInf, true, true) : 1.0);
  } else {
    if (r.has(p, "b0")) r.fail(sub(p, "b0"), "key 'b0' applies to constant kernels only");
    const double s = r.has(p, "s") ? r.number(sub(p, "s"), 0, 1, true, true) : 0.25;
    const double K = r.has(p, "K") ? r.number(sub(p, "K"), 0, kInf, true, true) : 1.0;
    k = KernelSpec::singular(s, K);
  }
  if (r.has(p, "cutoff")) k = k.with_cutoff(r.number(sub(p, "cutoff"), 0, kInf, true, true));
  return k;
}

DatumSpec read_datum(const Reader& r, const std::string& p) {
  if (!r.at(p).is_object()) r.fail(p, fmt::format("{} must be an object", Reader::name(p)));
  if (!r.has(p, "type")) r.fail(p, fmt::format("{} needs a 'type'", Reader::name(p)));
  DatumSpec d;
  d.type = r.choice(sub(p, "type"), {"unit", "gaussian", "stable", "uniform_sphere", "discrete", "random"});
  if (d.type == "unit") r.object(p, {"type", "dim"});
  if (d.type == "gaussian") r.object(p, {"type", "dim", "sigma"});
  if (d.type == "stable") r.object(p, {"type", "dim", "index"});
  if (d.type == "uniform_sphere") r.object(p, {"type", "dim", "radius"});
  if (d.type == "discrete") r.object(p, {"type", "dim", "file", "atoms"});
  if (d.type == "random") r.object(p, {"type", "dim", "seed", "max_atoms", "max_speed"});
  if (r.has(p, "dim")) d.dim = static_cast<int>(r.integer(sub(p, "dim"), 1, 3));
  if (r.has(p, "sigma")) d.sigma = r.number(sub(p, "sigma"), 0, kInf, true, true);
  if (r.has(p, "index")) d.index = r.number(sub(p, "index"), 0, 2, true, false);
  if (r.has(p, "radius")) d.radius = r.number(sub(p, "radius"), 0, kInf, true, true);
  if (r.has(p, "seed")) d.seed = r.unsigned_integer(sub(p, "seed"));
  if (r.has(p, "max_atoms")) d.max_atoms = static_cast<int>(r.integer(sub(p, "max_atoms"), 2, 64));
  if (r.has(p, "max_speed")) d.max_speed = r.number(sub(p, "max_speed"), 0, kInf, true, true);
  if (d.type == "discrete") {
    const bool file = r.has(p, "file"), atoms = r.has(p, "atoms");
    if (file == atoms) r.fail(p, "discrete datum needs exactly one of 'file' and 'atoms'");
    if (file) d.file = r.text(sub(p, "file"));
    if (atoms) {
      const auto ap = sub(p, "atoms");
      const auto n = r.array(ap, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const auto rp = sub(ap, i);
        if (r.array(rp, 0) != static_cast<std::size_t>(d.dim + 1))
          r.fail(rp, fmt::format("atom rows need {} coordinates and a weight", d.dim));
        std::vector<double> row;
        for (std::size_t j = 0; j <= static_cast<std::size_t>(d.dim); ++j)
          row.push_back(r.number(sub(rp, j), -kInf, kInf, true, true));
        d.atoms.push_back(std::move(row));
      }
    }
  }
  return d;
}

std::vector<double> read_numbers(const Reader& r, const std::string& p, double lo, double hi, bool lo_open,
                                 bool hi_open) {
  std::vector<double> out;
  const auto n = r.array(p, 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(r.number(sub(p, i), lo, hi, lo_open, hi_open));
  return out;
}

ExperimentConfig read_config(const Reader& r) {
  r.object("", {"experiment", "kernel", "initial", "initial_tilde", "alpha", "beta", "alpha_prime", "alphas",
                "tail_radius", "grid", "quadrature", "T", "dt", "integrator", "snapshot_every", "picard_tol",
                "time_tol", "cutoffs", "direct", "tolerance", "spot_points", "smoothing", "output", "seed"});
  ExperimentConfig c;
  if (!r.has("", "experiment")) r.fail("", "missing required key 'experiment'");
  c.experiment = r.text("/experiment");
  if (!find_experiment(c.experiment))
    r.fail("/experiment", fmt::format("unknown experiment '{}' (see --list)", c.experiment));

  if (r.has("", "kernel")) c.kernel = read_kernel(r, "/kernel");
  if (r.has("", "initial")) c.initial = read_datum(r, "/initial");
  if (r.has("", "initial_tilde")) c.initial_tilde = read_datum(r, "/initial_tilde");
  if (r.has("", "alpha")) c.alpha = r.number("/alpha", 0, 2, true, false);
  if (r.has("", "beta")) c.beta = r.number("/beta", 0, 2, true, false);
  if (r.has("", "alpha_prime")) c.alpha_prime = r.number("/alpha_prime", 0, 2, true, false);
  if (r.has("", "alphas")) c.alphas = read_numbers(r, "/alphas", 0, 2, true, false);
  if (r.has("", "tail_radius")) c.tail_radius = r.number("/tail_radius", 0, kInf, true, true);

  if (r.has("", "grid")) {
    r.object("/grid", {"intervals", "r_max", "r_lin"});
    if (r.has("/grid", "intervals")) c.grid.intervals = static_cast<int>(r.integer("/grid/intervals", 16, 1 << 16));
    if (r.has("/grid", "r_max")) c.grid.r_max = r.number("/grid/r_max", 0, kInf, true, true);
    if (r.has("/grid", "r_lin")) c.grid.r_lin = r.number("/grid/r_lin", 0, kInf, true, true);
    if (c.grid.r_lin >= c.grid.r_max) r.fail("/grid", "grid.r_lin must be below grid.r_max");
  }
  if (r.has("", "quadrature")) {
    const std::string p = "/quadrature";
    r.object(p, {"theta_min", "panel_count", "nodes_per_panel", "grading", "max_panel"});
    if (r.has(p, "theta_min")) c.quad.theta_min = r.number(sub(p, "theta_min"), 0, 0.1, true, false);
    if (r.has(p, "panel_count")) c.quad.panel_count = static_cast<int>(r.integer(sub(p, "panel_count"), 0, 4096));
    if (r.has(p, "nodes_per_panel"))
      c.quad.nodes_per_panel = static_cast<int>(r.integer(sub(p, "nodes_per_panel"), 2, 64));
    if (r.has(p, "grading")) c.quad.grading = r.number(sub(p, "grading"), 0, 1, true, true);
    if (r.has(p, "max_panel")) c.quad.max_panel = r.number(sub(p, "max_panel"), 0, std::numbers::pi / 2, true, false);
  }

  if (r.has("", "T")) c.T = r.number("/T", 0, kInf, true, true);
  if (r.has("", "dt")) c.dt = r.number("/dt", 0, kInf, true, true);
  if (c.dt > c.T) r.fail(r.has("", "dt") ? "/dt" : "/T", fmt::format("dt = {} exceeds T = {}", c.dt, c.T));
  if (r.has("", "integrator"))
    c.integrator = r.choice("/integrator", {"duhamel", "exponential"}) == "duhamel" ? Integrator::duhamel_picard
                                                                                   : Integrator::exponential_euler;
  if (r.has("", "snapshot_every")) c.snapshot_every = static_cast<int>(r.integer("/snapshot_every", 1, 1 << 20));
  if (r.has("", "picard_tol")) c.picard_tol = r.number("/picard_tol", 0, 1, true, true);
  if (r.has("", "time_tol")) c.time_tol = r.number("/time_tol", 0, 1, true, true);
  if (r.has("", "cutoffs")) {
    c.cutoffs = read_numbers(r, "/cutoffs", 0, kInf, true, true);
    if (!std::is_sorted(c.cutoffs.begin(), c.cutoffs.end()) ||
        std::adjacent_find(c.cutoffs.begin(), c.cutoffs.end()) != c.cutoffs.end())
      r.fail("/cutoffs", "cutoffs must be strictly increasing");
  }
  if (r.has("", "direct")) c.direct = r.boolean("/direct");
  if (r.has("", "tolerance")) c.tolerance = r.number("/tolerance", 0, 1, false, false);
  if (r.has("", "spot_points")) c.spot_points = static_cast<int>(r.integer("/spot_points", 1, 64));

  if (r.has("", "smoothing")) {
    const std::string p = "/smoothing";
    r.object(p, {"orders", "R", "probe_time", "early_time", "tail_radius", "v_max", "speeds"});
    auto& s = c.smoothing;
    if (r.has(p, "orders")) {
      s.orders.clear();
      const auto n = r.array(sub(p, "orders"), 1);
      for (std::size_t i = 0; i < n; ++i)
        s.orders.push_back(static_cast<int>(r.integer(sub(sub(p, "orders"), i), 0, 8)));
    }
    if (r.has(p, "R")) s.R = r.number(sub(p, "R"), 0, kInf, true, true);
    if (r.has(p, "probe_time")) s.probe_time = r.number(sub(p, "probe_time"), 0, kInf, false, true);
    if (r.has(p, "early_time")) s.early_time = r.number(sub(p, "early_time"), 0, kInf, false, true);
    if (r.has(p, "tail_radius")) s.tail_radius = r.number(sub(p, "tail_radius"), 0, kInf, true, true);
    if (r.has(p, "v_max")) s.v_max = r.number(sub(p, "v_max"), 0, kInf, true, true);
    if (r.has(p, "speeds")) s.speeds = static_cast<int>(r.integer(sub(p, "speeds"), 10, 1 << 20));
  }
  if (r.has("", "output")) c.output = r.text("/output");
  if (r.has("", "seed")) c.seed = r.unsigned_integer("/seed");

  if (!r.has("", "alphas"))
    c.alphas = c.experiment == "moments" ? std::vector<double>{0.5, 1.0, 1.5} : std::vector<double>{0.5, 1.0, 1.5, 2.0};
  if (c.experiment == "moments")
    for (std::size_t i = 0; i < c.alphas.size(); ++i)
      if (c.alphas[i] >= 2.0) r.fail(sub("/alphas", i), "moments need alphas below 2");

  const auto& info = *find_experiment(c.experiment);
  if (info.needs_initial && !c.initial)
    r.fail("/experiment", fmt::format("experiment '{}' needs an 'initial' datum", c.experiment));
  if (info.needs_pair && !c.initial_tilde)
    r.fail("/experiment", fmt::format("experiment '{}' needs an 'initial_tilde' datum", c.experiment));
  return c;
}

}  // namespace

SolverConfig ExperimentConfig::solver() const {
  SolverConfig s;
  s.kernel = kernel;
  s.alpha = alpha;
  s.grid = grid;
  s.quad = quad;
  s.T = T;
  s.dt = dt;
  s.picard_tol = picard_tol;
  s.time_tol = time_tol;
  s.snapshot_every = snapshot_every;
  s.integrator = integrator.value_or(kernel.bounded() ? Integrator::duhamel_picard : Integrator::exponential_euler);
  return s;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  json root;
  LineMap lines;
  Cursor cur;
  LineSax sax(root, cur, lines, source);
  const std::string buf(text);
  CountingIterator first(buf.data(), &cur), last(buf.data() + buf.size(), &cur);
  json::sax_parse(first, last, &sax);
  Reader r(root, lines, source);
  auto c = read_config(r);
  c.source = source;
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open configuration", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  auto c = parse_config(ss.str(), path);
  c.base_dir = std::filesystem::path(path).parent_path().string();
  return c;
}

CharFn make_datum(const DatumSpec& d, std::uint64_t seed, const std::string& base_dir) {
  if (d.type == "unit") return CharFn::unit(d.dim);
  if (d.type == "gaussian") return CharFn::gaussian(d.sigma, d.dim);
  if (d.type == "stable") return CharFn::stable(d.index, d.dim);
  if (d.type == "uniform_sphere") return CharFn::uniform_sphere(d.radius, d.dim);
  if (d.type == "random")
    return CharFn::discrete(random_mean_zero_measure(d.seed.value_or(seed), d.dim, d.max_atoms, d.max_speed));
  if (d.type == "discrete") {
    if (!d.file.empty()) {
      std::filesystem::path p(d.file);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      return CharFn::discrete(DiscreteMeasure::load(p.string(), d.dim));
    }
    std::vector<Point> pts;
    std::vector<double> ws;
    for (const auto& row : d.atoms) {
      Point x{0, 0, 0};
      for (int j = 0; j < d.dim; ++j) x[j] = row[j];
      pts.push_back(x);
      ws.push_back(row[d.dim]);
    }
    return CharFn::discrete(DiscreteMeasure(d.dim, std::move(pts), std::move(ws)));
  }
  throw ConfigError(fmt::format("unknown datum type '{}'", d.type));
}

}  // namespace bobylev::cli
