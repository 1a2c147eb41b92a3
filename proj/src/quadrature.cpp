#include "wedgeheat/quadrature.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wedgeheat {

// ---------------------------------------------------------------------------
// Gauss-Legendre rules

namespace {

GaussRule compute_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    if (n == 1) {
      x = 0.0;
      dp = 1.0;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre requires n >= 1");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

void append_gauss_panel(double a, double b, int n, std::vector<double>& nodes,
                        std::vector<double>& weights) {
  const GaussRule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    nodes.push_back(mid + half * rule.nodes[i]);
    weights.push_back(half * rule.weights[i]);
  }
}

// ---------------------------------------------------------------------------
// Panel grids

void TimeQuadSpec::validate() const {
  if (n_panels < 2) throw std::invalid_argument("TimeQuadSpec.n_panels must be >= 2");
  if (points_per_panel < 2) throw std::invalid_argument("TimeQuadSpec.points_per_panel must be >= 2");
  if (!(refinement_ratio > 0.0 && refinement_ratio < 1.0)) {
    throw std::invalid_argument("TimeQuadSpec.refinement_ratio must lie in (0, 1)");
  }
  if (terminal_power < 1) throw std::invalid_argument("TimeQuadSpec.terminal_power must be >= 1");
}

namespace {

// Maps Gauss variable xi in [-1, 1] to (point, jacobian) for a panel.
inline void map_point(const Panel& p, double xi, double& s, double& jac) {
  const double len = p.b - p.a;
  switch (p.map) {
    case PanelMap::linear:
      s = p.a + 0.5 * len * (xi + 1.0);
      jac = 0.5 * len;
      return;
    case PanelMap::graded_at_left:
    case PanelMap::graded_at_right: {
      const double v = 0.5 * (xi + 1.0);
      const double vm1 = std::pow(v, p.power - 1);
      const double d = len * vm1 * v;
      s = p.map == PanelMap::graded_at_left ? p.a + d : p.b - d;
      jac = 0.5 * len * p.power * vm1;
      return;
    }
  }
}

// Inverse of map_point.
inline double local_coordinate(const Panel& p, double s) {
  const double len = p.b - p.a;
  switch (p.map) {
    case PanelMap::linear:
      return 2.0 * (s - p.a) / len - 1.0;
    case PanelMap::graded_at_left:
      return 2.0 * std::pow(std::max(0.0, (s - p.a) / len), 1.0 / p.power) - 1.0;
    case PanelMap::graded_at_right:
      return 2.0 * std::pow(std::max(0.0, (p.b - s) / len), 1.0 / p.power) - 1.0;
  }
  return 0.0;
}

}  // namespace

PanelGrid::PanelGrid(std::vector<Panel> panels, int points_per_panel)
    : panels_(std::move(panels)), points_(points_per_panel) {
  if (panels_.empty()) throw std::invalid_argument("PanelGrid needs at least one panel");
  const GaussRule& rule = gauss_legendre(points_);
  nodes_.reserve(panels_.size() * rule.nodes.size());
  weights_.reserve(panels_.size() * rule.nodes.size());
  for (const Panel& p : panels_) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double s = 0.0;
      double jac = 0.0;
      map_point(p, rule.nodes[i], s, jac);
      nodes_.push_back(s);
      weights_.push_back(rule.weights[i] * jac);
    }
  }
}

PanelGrid PanelGrid::accumulating_right(const TimeQuadSpec& spec, double a, double b) {
  spec.validate();
  std::vector<Panel> panels;
  const double len = b - a;
  double dist = len;  // distance of the current left edge from b
  for (int j = 0; j < spec.n_panels - 1; ++j) {
    const double next = dist * spec.refinement_ratio;
    panels.push_back({b - dist, b - next});
    dist = next;
  }
  panels.push_back({b - dist, b, PanelMap::graded_at_right, spec.terminal_power});
  return PanelGrid(std::move(panels), spec.points_per_panel);
}

PanelGrid PanelGrid::accumulating_left(const TimeQuadSpec& spec, double a, double b) {
  spec.validate();
  std::vector<Panel> reversed;
  const double len = b - a;
  double dist = len;
  for (int j = 0; j < spec.n_panels - 1; ++j) {
    const double next = dist * spec.refinement_ratio;
    reversed.push_back({a + next, a + dist});
    dist = next;
  }
  reversed.push_back({a, a + dist, PanelMap::graded_at_left, spec.terminal_power});
  std::reverse(reversed.begin(), reversed.end());
  return PanelGrid(std::move(reversed), spec.points_per_panel);
}

PanelGrid PanelGrid::uniform(double a, double b, int n_panels, int points_per_panel) {
  std::vector<Panel> panels;
  for (int j = 0; j < n_panels; ++j) {
    panels.push_back({a + (b - a) * j / n_panels, a + (b - a) * (j + 1) / n_panels});
  }
  panels.back().b = b;
  return PanelGrid(std::move(panels), points_per_panel);
}

double integrate_time_singular(const TimeQuadSpec& spec, double t_end,
                               const std::function<double(double)>& h) {
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate_time_singular requires t_end > 0");
  return PanelGrid::accumulating_right(spec, 0.0, t_end).integrate(h);
}

double integrate_lag(const TimeQuadSpec& spec, double t_end, const std::function<double(double)>& g) {
  if (!(t_end > 0.0)) throw std::invalid_argument("integrate_lag requires t_end > 0");
  return PanelGrid::accumulating_left(spec, 0.0, t_end).integrate(g);
}

// ---------------------------------------------------------------------------
// Running integrals

CumulativeIntegral::CumulativeIntegral(const PanelGrid& grid, std::span<const double> values)
    : grid_(&grid) {
  if (values.size() != grid.size()) throw std::invalid_argument("CumulativeIntegral: size mismatch");
  const GaussRule& rule = gauss_legendre(grid.points_per_panel());
  const std::size_t n = rule.nodes.size();
  scaled_.resize(values.size());
  prefix_.assign(grid.panels().size() + 1, 0.0);
  panel_totals_.assign(grid.panels().size(), 0.0);
  for (std::size_t p = 0; p < grid.panels().size(); ++p) {
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = p * n + i;
      if (!std::isfinite(values[k])) throw NonFinite("CumulativeIntegral: non-finite sample");
      scaled_[k] = values[k] * grid.weights()[k] / rule.weights[i];
      acc.add(values[k] * grid.weights()[k]);
    }
    panel_totals_[p] = acc.value();
    prefix_[p + 1] = prefix_[p] + panel_totals_[p];
  }
}

double CumulativeIntegral::operator()(double x) const {
  const auto panels = grid_->panels();
  if (x <= panels.front().a) return 0.0;
  if (x >= panels.back().b) return prefix_.back();
  std::size_t p = 0;
  while (p + 1 < panels.size() && x >= panels[p].b) ++p;
  const Panel& panel = panels[p];
  const GaussRule& rule = gauss_legendre(grid_->points_per_panel());
  const std::size_t n = rule.nodes.size();
  const double xi_end = local_coordinate(panel, x);

  // Integrate the panel interpolant over [-1, xi_end] with the same Gauss rule.
  const double half = 0.5 * (xi_end + 1.0);
  double partial = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double y = -1.0 + half * (rule.nodes[m] + 1.0);
    double interp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double lj = 1.0;
      for (std::size_t l = 0; l < n; ++l) {
        if (l != j) lj *= (y - rule.nodes[l]) / (rule.nodes[j] - rule.nodes[l]);
      }
      interp += scaled_[p * n + j] * lj;
    }
    partial += half * rule.weights[m] * interp;
  }
  // For panels mapped from the right end the local variable runs backwards.
  if (panel.map == PanelMap::graded_at_right) partial = panel_totals_[p] - partial;
  return prefix_[p] + partial;
}

// ---------------------------------------------------------------------------
// Polar integrals

double integrate_polar_weighted(const PolarGrid& grid, std::span<const double> values,
                                double weight_exponent, Exec ex) {
  if (values.size() != grid.size()) throw std::invalid_argument("integrate_polar_weighted: size mismatch");
  const auto radii = grid.radii();
  const auto wr = grid.radial_weights();
  const auto wt = grid.angular_weights();
  const std::size_t nt = grid.n_theta();
  std::vector<double> rows(grid.n_r());
  for_each_index(grid.n_r(), ex, [&](std::size_t i) {
    KahanSum acc;
    for (std::size_t j = 0; j < nt; ++j) {
      const double v = values[i * nt + j];
      if (!std::isfinite(v)) {
        throw NonFinite("integrate_polar_weighted: non-finite value at r=" + std::to_string(radii[i]));
      }
      acc.add(v * wt[j]);
    }
    const double r = radii[i];
    const double radial = weight_exponent == 0.0 ? 1.0 : std::pow(r, weight_exponent);
    rows[i] = acc.value() * radial * r * wr[i];
  });
  return ordered_sum(rows);
}

CutoffExtrapolation extrapolate_cutoff(std::span<const double> values, double delta_ratio) {
  CutoffExtrapolation out;
  if (values.size() < 3) return out;
  const std::size_t n = values.size();
  const double d0 = values[n - 2] - values[n - 3];
  const double d1 = values[n - 1] - values[n - 2];
  if (d0 == 0.0 || d1 == 0.0) {
    out.limit = values[n - 1];
    out.exponent = std::numeric_limits<double>::infinity();
    return out;
  }
  const double ratio = d1 / d0;
  out.exponent = std::log(std::fabs(ratio)) / std::log(delta_ratio);
  if (ratio > 0.0 && ratio < 1.0) out.limit = values[n - 1] + d1 * ratio / (1.0 - ratio);
  return out;
}

}  // namespace wedgeheat
