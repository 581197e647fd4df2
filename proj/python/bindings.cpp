#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fmt/format.h>

#include "bobylev/charfun.hpp"
#include "bobylev/errors.hpp"
#include "bobylev/kernel.hpp"
#include "bobylev/metric.hpp"
#include "bobylev/physical.hpp"
#include "bobylev/solver.hpp"

namespace py = pybind11;
using namespace bobylev;

namespace {

AngularQuadrature quad_or_default(const std::optional<QuadratureSettings>& q) {
  return make_quadrature(q.value_or(QuadratureSettings{}));
}

void bind_errors(py::module_& m) {
  const auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError).ptr();
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<AccuracyError>(m, "AccuracyError", base);
  py::register_exception<RangeError>(m, "RangeError", base);
  py::register_exception<VariantError>(m, "VariantError", base);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base);
  py::register_exception<StepSizeError>(m, "StepSizeError", base);
  py::register_exception<DivergenceError>(m, "DivergenceError", base);
  py::register_exception<NumericError>(m, "NumericError", base);
  py::register_exception<VerificationError>(m, "VerificationError", base);
}

void bind_kernel(py::module_& m) {
  py::class_<KernelSpec>(m, "KernelSpec")
      .def_static("constant", &KernelSpec::constant, py::arg("b0") = 1.0)
      .def_static("singular", &KernelSpec::singular, py::arg("s"), py::arg("K") = 1.0)
      .def("with_cutoff", &KernelSpec::with_cutoff, py::arg("n"))
      .def_property_readonly("bounded", &KernelSpec::bounded)
      .def_readonly("s", &KernelSpec::s)
      .def_readonly("K", &KernelSpec::K)
      .def_readonly("b0", &KernelSpec::b0)
      .def_readonly("cutoff", &KernelSpec::cutoff)
      .def("__repr__", &KernelSpec::describe);

  py::class_<QuadratureSettings>(m, "QuadratureSettings")
      .def(py::init<>())
      .def_readwrite("theta_min", &QuadratureSettings::theta_min)
      .def_readwrite("panel_count", &QuadratureSettings::panel_count)
      .def_readwrite("nodes_per_panel", &QuadratureSettings::nodes_per_panel)
      .def_readwrite("grading", &QuadratureSettings::grading)
      .def_readwrite("max_panel", &QuadratureSettings::max_panel);

  py::class_<KernelConstant>(m, "KernelConstant")
      .def_readonly("value", &KernelConstant::value)
      .def_readonly("est_error", &KernelConstant::est_error)
      .def_readonly("divergent", &KernelConstant::divergent)
      .def("__repr__", [](const KernelConstant& k) {
        return k.divergent ? std::string("KernelConstant(divergent)")
                           : fmt::format("KernelConstant({}, est_error={})", k.value, k.est_error);
      });

  m.def("eval_b", &eval_b, py::arg("spec"), py::arg("theta"));
  m.def(
      "gamma2", [](const KernelSpec& k, std::optional<QuadratureSettings> q) { return gamma2(k, quad_or_default(q)); },
      py::arg("spec"), py::arg("quadrature") = py::none());
  m.def(
      "gamma_alpha",
      [](const KernelSpec& k, double a, std::optional<QuadratureSettings> q) {
        return gamma_alpha(k, a, quad_or_default(q));
      },
      py::arg("spec"), py::arg("alpha"), py::arg("quadrature") = py::none());
  m.def(
      "lambda_alpha",
      [](const KernelSpec& k, double a, std::optional<QuadratureSettings> q) {
        return lambda_alpha(k, a, quad_or_default(q));
      },
      py::arg("spec"), py::arg("alpha"), py::arg("quadrature") = py::none());
  m.def(
      "kernel_factor",
      [](const KernelSpec& k, double a, std::optional<QuadratureSettings> q) {
        return kernel_factor(k, a, quad_or_default(q));
      },
      py::arg("spec"), py::arg("alpha"), py::arg("quadrature") = py::none());
}

void bind_charfun(py::module_& m) {
  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
      .def_static(
          "make",
          [](int intervals, double r_max, double r_lin) {
            return std::const_pointer_cast<RadialGrid>(RadialGrid::make({intervals, r_max, r_lin}));
          },
          py::arg("intervals") = 512, py::arg("r_max") = 64.0, py::arg("r_lin") = 1.0)
      .def_property_readonly("radii", [](const RadialGrid& g) {
        return std::vector<double>(g.radii().begin(), g.radii().end());
      })
      .def("__len__", &RadialGrid::size);

  py::class_<RadialCharFn>(m, "RadialCharFn")
      .def_property_readonly("values",
                             [](const RadialCharFn& f) { return std::vector<double>(f.values().begin(), f.values().end()); })
      .def_property_readonly("radii", [](const RadialCharFn& f) {
        return std::vector<double>(f.grid().radii().begin(), f.grid().radii().end());
      })
      .def("__call__", py::overload_cast<double>(&RadialCharFn::eval, py::const_), py::arg("r"))
      .def("deviation", py::overload_cast<double>(&RadialCharFn::deviation, py::const_), py::arg("r"))
      .def_property_readonly("holder_exponent", &RadialCharFn::holder_exponent)
      .def_property_readonly("max_modulus", &RadialCharFn::max_modulus)
      .def("__len__", &RadialCharFn::size);

  py::class_<CharFn>(m, "CharFn")
      .def_static("unit", &CharFn::unit, py::arg("dim") = 3)
      .def_static("gaussian", &CharFn::gaussian, py::arg("sigma") = 1.0, py::arg("dim") = 3)
      .def_static("stable", &CharFn::stable, py::arg("alpha"), py::arg("dim") = 3)
      .def_static("uniform_sphere", &CharFn::uniform_sphere, py::arg("r0") = 1.0, py::arg("dim") = 3)
      .def_static(
          "discrete",
          [](const std::vector<Point>& points, const std::vector<double>& weights, int dim) {
            return CharFn::discrete(DiscreteMeasure(dim, points, weights));
          },
          py::arg("points"), py::arg("weights"), py::arg("dim") = 3)
      .def_static(
          "random_discrete",
          [](std::uint64_t seed, int dim, int max_atoms, double max_speed) {
            return CharFn::discrete(random_mean_zero_measure(seed, dim, max_atoms, max_speed));
          },
          py::arg("seed"), py::arg("dim") = 3, py::arg("max_atoms") = 8, py::arg("max_speed") = 10.0)
      .def_static("radial_grid", &CharFn::radial_grid, py::arg("psi"))
      .def("__call__", &CharFn::eval, py::arg("xi"))
      .def("radial", &CharFn::radial, py::arg("r"))
      .def_property_readonly("isotropic", &CharFn::isotropic)
      .def_property_readonly("dim", &CharFn::dim)
      .def_property_readonly("name", &CharFn::name)
      .def("__repr__", [](const CharFn& f) { return "CharFn(" + f.name() + ")"; });

  m.def("sample_radial", [](const CharFn& f, const std::shared_ptr<RadialGrid>& g) { return sample_radial(f, g); },
        py::arg("phi"), py::arg("grid"));
  m.def(
      "bochner_spotcheck",
      [](const CharFn& f, const std::vector<Point>& pts) { return bochner_spotcheck(f, std::span<const Point>(pts)); },
      py::arg("phi"), py::arg("points"));
}

void bind_metric(py::module_& m) {
  py::class_<NormResult>(m, "NormResult")
      .def_readonly("value", &NormResult::value)
      .def_readonly("eps", &NormResult::eps)
      .def_readonly("R", &NormResult::R)
      .def_readonly("tail_bound", &NormResult::tail_bound)
      .def_readonly("inner", &NormResult::inner)
      .def_readonly("est_error", &NormResult::est_error)
      .def_readonly("divergent", &NormResult::divergent)
      .def_readonly("growth", &NormResult::growth)
      .def_property_readonly("estimate", &NormResult::estimate)
      .def("__repr__", [](const NormResult& n) {
        return n.divergent ? fmt::format("NormResult(divergent, growth={})", n.growth)
                           : fmt::format("NormResult({}, est_error={})", n.value, n.est_error);
      });

  py::class_<IntegralOptions>(m, "IntegralOptions")
      .def(py::init<>())
      .def_readwrite("eps", &IntegralOptions::eps)
      .def_readwrite("R", &IntegralOptions::R)
      .def_readwrite("per_decade", &IntegralOptions::per_decade)
      .def_readwrite("max_periods", &IntegralOptions::max_periods);

  m.def("sup_norm", [](const CharFn& a, const CharFn& b, double al) { return sup_norm(a, b, al); }, py::arg("a"),
        py::arg("b"), py::arg("alpha"));
  m.def("m_norm", &m_norm, py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("options") = IntegralOptions{});
  m.def("dis_ab", [](const CharFn& a, const CharFn& b, double al, double be) { return dis_ab(a, b, al, be); },
        py::arg("a"), py::arg("b"), py::arg("alpha"), py::arg("beta"));
  m.def("moment_exact", &moment_exact, py::arg("phi"), py::arg("alpha"), py::arg("options") = IntegralOptions{});
  m.def("moment_upper", &moment_upper, py::arg("phi"), py::arg("alpha"), py::arg("options") = IntegralOptions{});
  m.def("tail_moment_bound", &tail_moment_bound, py::arg("phi"), py::arg("alpha"), py::arg("R"));
  m.def("c_constant", &c_constant, py::arg("alpha"), py::arg("dim") = 3,
        py::arg("M") = std::numeric_limits<double>::infinity());
  m.def("embedding_constant", &embedding_constant, py::arg("alpha"), py::arg("beta"), py::arg("dim") = 3);
  m.def("taylor_constant", &taylor_constant, py::arg("alpha"));
}

void bind_solver(py::module_& m) {
  py::enum_<Integrator>(m, "Integrator")
      .value("duhamel_picard", Integrator::duhamel_picard)
      .value("exponential_euler", Integrator::exponential_euler);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("kernel", &SolverConfig::kernel)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("quadrature", &SolverConfig::quad)
      .def_readwrite("T", &SolverConfig::T)
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("picard_tol", &SolverConfig::picard_tol)
      .def_readwrite("time_tol", &SolverConfig::time_tol)
      .def_readwrite("integrator", &SolverConfig::integrator)
      .def_readwrite("snapshot_every", &SolverConfig::snapshot_every)
      .def_readwrite("diagnostics", &SolverConfig::diagnostics)
      .def_property(
          "grid_intervals", [](const SolverConfig& c) { return c.grid.intervals; },
          [](SolverConfig& c, int n) { c.grid.intervals = n; })
      .def_property(
          "grid_r_max", [](const SolverConfig& c) { return c.grid.r_max; },
          [](SolverConfig& c, double r) { c.grid.r_max = r; });

  py::class_<Diagnostics>(m, "Diagnostics")
      .def_readonly("t", &Diagnostics::t)
      .def_readonly("mass", &Diagnostics::mass)
      .def_readonly("max_modulus", &Diagnostics::max_modulus)
      .def_readonly("sup_norm", &Diagnostics::sup_norm)
      .def_readonly("m_norm", &Diagnostics::m_norm)
      .def_readonly("moment_upper", &Diagnostics::moment_upper);

  py::class_<StepReport>(m, "StepReport")
      .def_readonly("t", &StepReport::t)
      .def_readonly("iterations", &StepReport::iterations)
      .def_readonly("contraction", &StepReport::contraction)
      .def_readonly("bound", &StepReport::bound);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("snapshots", &Trajectory::snapshots)
      .def_readonly("diagnostics", &Trajectory::diagnostics)
      .def_readonly("steps", &Trajectory::steps)
      .def_readonly("gamma2", &Trajectory::gamma2)
      .def_readonly("gamma_alpha", &Trajectory::gamma_alpha)
      .def_readonly("lambda_alpha", &Trajectory::lambda_alpha);

  const auto released = py::call_guard<py::gil_scoped_release>();
  m.def("evolve", &evolve, py::arg("psi0"), py::arg("config"), released);
  m.def("duhamel_evolve", &duhamel_evolve, py::arg("psi0"), py::arg("config"), released);
  m.def("evolve_noncutoff", &evolve_noncutoff, py::arg("psi0"), py::arg("config"), released);
  m.def("trajectory_distance", &trajectory_distance, py::arg("a"), py::arg("b"));

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("lambda_alpha", &StabilityReport::lambda_alpha)
      .def_readonly("max_m_ratio", &StabilityReport::max_m_ratio)
      .def_readonly("max_sup_ratio", &StabilityReport::max_sup_ratio)
      .def_readonly("passed", &StabilityReport::pass);
  m.def("verify_stability", &verify_stability, py::arg("psi0"), py::arg("psi0_tilde"), py::arg("config"),
        py::arg("tolerance") = 0.05, released);
}

void bind_physical(py::module_& m) {
  py::class_<DensityProfile>(m, "DensityProfile")
      .def_readonly("v", &DensityProfile::v)
      .def_readonly("f", &DensityProfile::f)
      .def_readonly("mass", &DensityProfile::mass)
      .def_readonly("mass_error", &DensityProfile::mass_error)
      .def_readonly("applicable", &DensityProfile::applicable)
      .def_readonly("note", &DensityProfile::note)
      .def_property_readonly("valid", &DensityProfile::valid);
  m.def(
      "inverse_transform",
      [](const RadialCharFn& psi, const std::vector<double>& v, double R) { return inverse_transform(psi, v, R); },
      py::arg("psi"), py::arg("v"), py::arg("R"));
  m.def("speed_grid", &speed_grid, py::arg("v_max"), py::arg("n"));

  py::class_<SobolevNorm>(m, "SobolevNorm")
      .def_readonly("value", &SobolevNorm::value)
      .def_readonly("previous", &SobolevNorm::previous)
      .def_readonly("converged", &SobolevNorm::converged)
      .def_readonly("growth", &SobolevNorm::growth);
  m.def("sobolev_norm", &sobolev_norm, py::arg("psi"), py::arg("N"), py::arg("R"));
  m.def("fourier_tail_sup", &fourier_tail_sup, py::arg("psi"), py::arg("R0"));
}

}  // namespace

PYBIND11_MODULE(_bobylev, m) {
  m.doc() = "Fourier-space solver and metric toolkit for the homogeneous Boltzmann equation";
  bind_errors(m);
  bind_kernel(m);
  bind_charfun(m);
  bind_metric(m);
  bind_solver(m);
  bind_physical(m);
}
