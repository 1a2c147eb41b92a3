#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wedgeheat/errors.hpp"
#include "wedgeheat/gauss.hpp"
#include "wedgeheat/geometry.hpp"
#include "wedgeheat/parallel.hpp"

namespace wedgeheat {

/// Dyadic time panels accumulating at a singular endpoint.
struct TimeQuadSpec {
  int n_panels = 24;
  int points_per_panel = 8;
  double refinement_ratio = 0.5;
  /// The innermost panel uses distance = width * v^terminal_power, which
  /// makes (t_end - s)^a exact for a in {-3/4, -1/2, -1/4, 0, ...}.
  int terminal_power = 4;

  void validate() const;
};

/// How a panel's Gauss variable v in [0, 1] maps onto [a, b]. The graded
/// kinds use distance = (b - a) v^power from the marked end, which turns an
/// endpoint behaviour like distance^{-1/2} into a polynomial.
enum class PanelMap { linear, graded_at_left, graded_at_right };

struct Panel {
  double a;
  double b;
  PanelMap map = PanelMap::linear;
  int power = 1;
};

/// Composite Gauss rule on a sequence of panels; nodes are stored panel by
/// panel, points_per_panel nodes each.
class PanelGrid {
 public:
  PanelGrid(std::vector<Panel> panels, int points_per_panel);

  /// Panels on [a, b] shrinking geometrically toward b (right) or a (left).
  static PanelGrid accumulating_right(const TimeQuadSpec& spec, double a, double b);
  static PanelGrid accumulating_left(const TimeQuadSpec& spec, double a, double b);
  /// n uniform linear panels.
  static PanelGrid uniform(double a, double b, int n_panels, int points_per_panel);

  std::span<const Panel> panels() const { return panels_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }
  int points_per_panel() const { return points_; }
  std::size_t size() const { return nodes_.size(); }
  double lower() const { return panels_.front().a; }
  double upper() const { return panels_.back().b; }

  template <class F>
  double integrate(F&& f) const {
    KahanSum acc;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double v = f(nodes_[i]);
      if (!std::isfinite(v)) throw NonFinite("non-finite integrand at s=" + std::to_string(nodes_[i]));
      acc.add(v * weights_[i]);
    }
    return acc.value();
  }

 private:
  std::vector<Panel> panels_;
  int points_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// int_0^t_end h(s) ds with dyadic refinement toward s = t_end.
///
/// The innermost nodes sit within ~1e-14 t_end of the endpoint, where
/// t_end - s carries only a few significant digits; integrands written in
/// terms of the lag should use integrate_lag instead.
double integrate_time_singular(const TimeQuadSpec& spec, double t_end,
                               const std::function<double(double)>& h);

/// int_0^t_end g(u) du with the same refinement toward u = 0 (u = t_end - s).
double integrate_lag(const TimeQuadSpec& spec, double t_end, const std::function<double(double)>& g);

/// Running integral x -> int_lower^x f(s) ds for f sampled at the nodes of a
/// PanelGrid. Inside a panel the integrand (times the panel Jacobian) is
/// replaced by its interpolating polynomial, so values at arbitrary x carry
/// the accuracy of the underlying Gauss rule.
class CumulativeIntegral {
 public:
  CumulativeIntegral(const PanelGrid& grid, std::span<const double> values);

  double total() const { return prefix_.back(); }
  /// Clamps x into [lower, upper].
  double operator()(double x) const;

 private:
  const PanelGrid* grid_;
  std::vector<double> scaled_;  // f * jacobian at nodes, panel local
  std::vector<double> prefix_;  // integral up to the start of each panel
  std::vector<double> panel_totals_;
};

/// Sum over grid nodes of values[k] * r_k^weight_exponent * weight_k.
/// Throws NonFinite if any value is not finite.
double integrate_polar_weighted(const PolarGrid& grid, std::span<const double> values,
                                double weight_exponent, Exec ex = default_exec());

/// Same, evaluating f at the nodes through the parallel map.
template <class F>
double integrate_polar_weighted(const PolarGrid& grid, F&& f, double weight_exponent,
                                Exec ex = default_exec()) {
  std::vector<double> values(grid.size());
  for_each_index(grid.size(), ex, [&](std::size_t k) { values[k] = f(grid.point(k)); });
  return integrate_polar_weighted(grid, std::span<const double>(values), weight_exponent, ex);
}

/// Result of extrapolating a sequence of cutoff integrals I(delta_j), with
/// delta_j geometric, to delta -> 0 under the model I0 + c * delta^q.
struct CutoffExtrapolation {
  std::optional<double> limit;  ///< empty when the differences do not shrink
  double exponent = 0.0;        ///< fitted q (q <= 0 means no finite limit)
};

CutoffExtrapolation extrapolate_cutoff(std::span<const double> values, double delta_ratio);

}  // namespace wedgeheat
