#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bobylev/charfun.hpp"
#include "bobylev/kernel.hpp"
#include "bobylev/quadrature.hpp"
#include "bobylev/radial_grid.hpp"
#include "bobylev/solver.hpp"

namespace bobylev::cli {

/// Initial datum as named in the configuration.
struct DatumSpec {
  std::string type = "unit";  // unit, gaussian, stable, uniform_sphere, discrete, random
  double sigma = 1.0;         // gaussian
  double index = 1.0;         // stable
  double radius = 1.0;        // uniform_sphere
  int dim = 3;
  std::string file;                  // discrete: atom table
  std::vector<std::vector<double>> atoms;  // discrete: inline rows of coordinates then weight
  std::optional<std::uint64_t> seed;  // random; falls back to the run seed
  int max_atoms = 8;                  // random
  double max_speed = 10.0;            // random
};

struct SmoothingSpec {
  std::vector<int> orders{1, 2, 3, 4};
  double R = 64.0;
  double probe_time = 0.1;
  double early_time = 0.05;
  double tail_radius = 20.0;
  double v_max = 12.0;
  int speeds = 1200;
};

struct ExperimentConfig {
  std::string experiment;
  std::string source = "<config>";
  std::string base_dir;  // directory of the configuration file
  KernelSpec kernel = KernelSpec::constant(1.0);
  std::optional<DatumSpec> initial;
  std::optional<DatumSpec> initial_tilde;
  double alpha = 1.0;
  double beta = 1.5;
  double alpha_prime = 0.5;
  std::vector<double> alphas;  // default {0.5, 1, 1.5, 2}; moments stops below 2
  double tail_radius = 1.0;
  GridSpec grid;
  QuadratureSettings quad;
  double T = 0.5;
  double dt = 0.01;
  std::optional<Integrator> integrator;  // default: Duhamel for bounded kernels
  int snapshot_every = 1;
  double picard_tol = 1e-12;
  double time_tol = 1e-6;
  std::vector<double> cutoffs{4, 16, 64, 256};
  bool direct = true;
  double tolerance = 0.05;
  int spot_points = 16;
  SmoothingSpec smoothing;
  std::string output = "out";
  std::uint64_t seed = 1;

  [[nodiscard]] SolverConfig solver() const;
};

/// Parses and validates a configuration document. Syntax errors, unknown or
/// duplicate keys, wrong types and out-of-range values throw ConfigError
/// with a "source:line: message" text.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Builds the characteristic function of a datum; seed is used by random data
/// without an explicit seed. Relative atom-table paths resolve against base_dir.
CharFn make_datum(const DatumSpec& d, std::uint64_t seed, const std::string& base_dir = "");

}  // namespace bobylev::cli
