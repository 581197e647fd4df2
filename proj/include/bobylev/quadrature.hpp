#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bobylev {

/// Gauss–Legendre rule on the reference interval [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached n-point Gauss–Legendre rule (n >= 1). Thread-safe.
const GaussRule& gauss_legendre(int n);

/// Composite Gauss rule on [theta_min, pi/2] whose panels shrink
/// geometrically toward theta_min.
///
/// Panel breakpoints are theta_min + L q^k (k = 0..P-1, L = pi/2 - theta_min)
/// followed by theta_min itself, so the last panel abuts the inner cutoff.
/// The rule is immutable; refinement returns a new rule.
class AngularQuadrature {
 public:
  AngularQuadrature() = default;

  static AngularQuadrature build(double theta_min, int panel_count,
                                 int nodes_per_panel, double grading);

  /// Rule on explicit, strictly increasing breakpoints.
  static AngularQuadrature from_breakpoints(std::vector<double> breakpoints,
                                            int nodes_per_panel);

  /// Inserts a breakpoint (e.g. the kink of a cutoff kernel). No-op when the
  /// point is outside (theta_min, pi/2) or already a breakpoint.
  [[nodiscard]] AngularQuadrature with_breakpoint(double theta) const;

  /// Splits every panel longer than max_length into equal pieces.
  [[nodiscard]] AngularQuadrature with_max_panel(double max_length) const;

  /// Bisects every panel.
  [[nodiscard]] AngularQuadrature refined() const;

  [[nodiscard]] double theta_min() const { return breaks_.front(); }
  [[nodiscard]] std::span<const double> nodes() const { return nodes_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::span<const double> breakpoints() const { return breaks_; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] std::size_t panel_count() const { return breaks_.size() - 1; }
  [[nodiscard]] int nodes_per_panel() const { return nodes_per_panel_; }

  /// Index range [first, last) of the nodes belonging to panel p.
  [[nodiscard]] std::size_t panel_begin(std::size_t p) const {
    return p * static_cast<std::size_t>(nodes_per_panel_);
  }

  template <class F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(nodes_[i]);
    return sum;
  }

  /// Per-panel integrals, ordered from the panel at pi/2 down to theta_min.
  template <class F>
  std::vector<double> panel_sums(F&& f) const {
    std::vector<double> out(panel_count(), 0.0);
    for (std::size_t p = 0; p < panel_count(); ++p) {
      double s = 0.0;
      for (std::size_t k = panel_begin(p); k < panel_begin(p + 1); ++k)
        s += weights_[k] * f(nodes_[k]);
      out[panel_count() - 1 - p] = s;
    }
    return out;
  }

 private:
  void assemble();

  std::vector<double> breaks_;  // increasing, front() == theta_min
  int nodes_per_panel_ = 0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// User-facing quadrature parameters. panel_count == 0 selects enough
/// geometric panels for the grading to reach theta_min.
struct QuadratureSettings {
  double theta_min = 1e-8;
  int panel_count = 0;
  int nodes_per_panel = 8;
  double grading = 0.5;
  double max_panel = 0.1;
};

AngularQuadrature make_quadrature(const QuadratureSettings& settings);

/// Number of geometric panels needed for L q^k to fall below theta_min.
int auto_panel_count(double theta_min, double grading);

/// Panel-wise 15-point Gauss–Kronrod on fixed breakpoints. Deterministic:
/// the same breakpoints always give the same nodes.
struct PanelIntegral {
  double value = 0.0;
  double error = 0.0;
};

template <class F>
PanelIntegral integrate_panels(F&& f, std::span<const double> breakpoints);

/// Log-spaced breakpoints on [a, b] with the given density per decade.
std::vector<double> log_breakpoints(double a, double b, int per_decade);

/// Merges and sorts breakpoint sets, dropping near-duplicates.
std::vector<double> merge_breakpoints(std::vector<double> a, std::span<const double> b);

namespace detail {
struct Kronrod15 {
  // abscissae in [0,1) for the symmetric rule on [-1,1]
  static constexpr double x[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};
}  // namespace detail

template <class F>
PanelIntegral integrate_panels(F&& f, std::span<const double> breakpoints) {
  using K = detail::Kronrod15;
  PanelIntegral out;
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p];
    const double b = breakpoints[p + 1];
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = K::wk[7] * fc;
    double gauss = K::wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      const double dx = h * K::x[j];
      const double s = f(c - dx) + f(c + dx);
      kron += K::wk[j] * s;
      if (j % 2 == 1) gauss += K::wg[j / 2] * s;
    }
    out.value += h * kron;
    out.error += std::abs(h * (kron - gauss));
  }
  return out;
}

}  // namespace bobylev
