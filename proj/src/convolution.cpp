#include "wedgeheat/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include "wedgeheat/errors.hpp"
#include "wedgeheat/special.hpp"

namespace wedgeheat {

// ---------------------------------------------------------------------------
// Inputs

void TimeSchedule::validate() const {
  if (amplitudes.size() != switch_times.size() + 1) {
    throw std::invalid_argument("TimeSchedule needs one more amplitude than switch times");
  }
  double prev = 0.0;
  for (double s : switch_times) {
    if (!(s > prev)) throw std::invalid_argument("TimeSchedule switch times must be positive and increasing");
    prev = s;
  }
  for (double a : amplitudes) {
    if (!std::isfinite(a)) throw std::invalid_argument("TimeSchedule amplitudes must be finite");
  }
}

double TimeSchedule::operator()(double s) const {
  const auto it = std::upper_bound(switch_times.begin(), switch_times.end(), s);
  return amplitudes[static_cast<std::size_t>(it - switch_times.begin())];
}

SpatialField::SpatialField(std::vector<AngularMode> modes) : modes_(std::move(modes)) {
  for (const auto& m : modes_) {
    if (m.m < 1) throw std::invalid_argument("angular mode index must be >= 1");
  }
}

SpatialField SpatialField::separable(int m, RadialProfile radial) {
  return SpatialField({AngularMode{m, std::move(radial)}});
}

SpatialField SpatialField::tabulated(const PolarGrid& grid, std::span<const double> values, int n_modes) {
  if (values.size() != grid.size()) throw std::invalid_argument("SpatialField::tabulated: size mismatch");
  if (n_modes < 1) throw std::invalid_argument("SpatialField::tabulated: n_modes must be >= 1");
  const double k0 = grid.domain().kappa0();
  const auto radii = grid.radii();
  const auto angles = grid.angles();
  const auto wt = grid.angular_weights();
  const std::size_t nt = grid.n_theta();
  std::vector<AngularMode> modes;
  for (int m = 1; m <= n_modes; ++m) {
    std::vector<double> coeff(grid.n_r());
    for (std::size_t i = 0; i < grid.n_r(); ++i) {
      KahanSum acc;
      for (std::size_t j = 0; j < nt; ++j) acc.add(values[i * nt + j] * std::sin(m * kPi * angles[j] / k0) * wt[j]);
      coeff[i] = 2.0 / k0 * acc.value();
    }
    modes.push_back({m, RadialProfile::tabulated(std::vector<double>(radii.begin(), radii.end()), coeff)});
  }
  return SpatialField(std::move(modes));
}

double SpatialField::operator()(double kappa0, PolarPoint x) const {
  double out = 0.0;
  for (const auto& m : modes_) {
    const double f = m.radial(x.r);
    if (f != 0.0) out += f * std::sin(m.m * kPi * x.theta / kappa0);
  }
  return out;
}

void SourceSpec::validate() const {
  for (const auto& t : terms) t.schedule.validate();
}

double SourceSpec::operator()(double kappa0, double t, PolarPoint x) const {
  double out = 0.0;
  for (const auto& term : terms) out += term.schedule(t) * term.field(kappa0, x);
  return out;
}

namespace {

std::vector<double> merged_switches(auto const& items) {
  std::set<double> s;
  for (const auto& it : items) s.insert(it.schedule.switch_times.begin(), it.schedule.switch_times.end());
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<double> SourceSpec::switch_times() const { return merged_switches(terms); }

void NoiseSpec::validate() const {
  std::set<int> seen;
  for (const auto& m : modes) {
    if (!seen.insert(m.index).second) {
      throw std::invalid_argument("NoiseSpec: duplicate mode index " + std::to_string(m.index));
    }
    m.schedule.validate();
  }
}

double NoiseSpec::l2_norm(double kappa0, double t, PolarPoint x) const {
  double s = 0.0;
  for (const auto& m : modes) {
    const double v = m.schedule(t) * m.field(kappa0, x);
    s += v * v;
  }
  return std::sqrt(s);
}

std::vector<double> NoiseSpec::switch_times() const { return merged_switches(modes); }

// ---------------------------------------------------------------------------
// Quadrature controls

void ConvolutionQuad::validate() const {
  if (!(window_sigmas >= 6.0)) throw std::invalid_argument("ConvolutionQuad.window_sigmas must be >= 6");
  if (rho_panels < 1 || rho_points < 2) throw std::invalid_argument("ConvolutionQuad: rho_panels >= 1, rho_points >= 2");
  if (!(vertex_ratio > 0.0 && vertex_ratio < 1.0) || vertex_panels < 1) {
    throw std::invalid_argument("ConvolutionQuad: vertex_ratio in (0,1), vertex_panels >= 1");
  }
  if (!(tau_floor_factor > 0.0 && tau_floor_factor <= 1.0)) {
    throw std::invalid_argument("ConvolutionQuad.tau_floor_factor must lie in (0, 1]");
  }
  tau.validate();
}

ConvolutionQuad ConvolutionQuad::refined() const {
  ConvolutionQuad q = *this;
  q.rho_panels *= 2;
  q.vertex_panels *= 2;
  q.tau.points_per_panel *= 2;
  q.tau_floor_factor *= 0.25;
  return q;
}

PanelGrid refined_time_grid(double t_end, double finest, std::span<const double> breaks, const TimeQuadSpec& spec,
                            bool refine_after_breaks) {
  spec.validate();
  if (!(t_end > 0.0) || !(finest > 0.0)) throw std::invalid_argument("refined_time_grid: t_end, finest > 0");
  std::set<double> anchors{0.0};
  for (double b : breaks) {
    if (b > 0.0 && b < t_end) anchors.insert(b);
  }
  std::set<double> edges(anchors.begin(), anchors.end());
  edges.insert(t_end);
  std::set<double> graded_starts{0.0};
  std::vector<double> anchor_list(anchors.begin(), anchors.end());
  for (std::size_t i = 0; i < anchor_list.size(); ++i) {
    const double a = anchor_list[i];
    if (a > 0.0 && !refine_after_breaks) continue;
    const double next = i + 1 < anchor_list.size() ? anchor_list[i + 1] : t_end;
    double d = next - a;
    while (d > finest) {
      d *= spec.refinement_ratio;
      edges.insert(a + d);
    }
    graded_starts.insert(a);
  }
  std::vector<double> e(edges.begin(), edges.end());
  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (!(e[i + 1] > e[i])) continue;
    if (graded_starts.count(e[i]) != 0) {
      panels.push_back({e[i], e[i + 1], PanelMap::graded_at_left, spec.terminal_power});
    } else {
      panels.push_back({e[i], e[i + 1]});
    }
  }
  return PanelGrid(std::move(panels), spec.points_per_panel);
}

// ---------------------------------------------------------------------------
// Mode transform

namespace {

double mode_order(const KernelConfig& cfg, int m) { return m * cfg.domain.critical_exponent(); }

// Gauss sum of f over [a, b] with rule `rule`.
template <class F>
double gauss_panel(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

// Panel edges for an integral over [lo, hi] with panels no wider than pw,
// split at `cuts`, geometrically graded toward 0 when lo == 0.
std::vector<double> window_edges(double lo, double hi, double pw, std::span<const double> cuts, double ratio,
                                 int n_geometric) {
  std::vector<double> seg{lo};
  for (double c : cuts) {
    if (c > lo && c < hi) seg.push_back(c);
  }
  seg.push_back(hi);
  std::vector<double> edges;
  for (std::size_t s = 0; s + 1 < seg.size(); ++s) {
    double a = seg[s];
    const double b = seg[s + 1];
    if (a == 0.0) {
      const double c = std::min(b, pw);
      double g = c;
      std::vector<double> geo;
      for (int j = 0; j < n_geometric; ++j) {
        g *= ratio;
        geo.push_back(g);
      }
      edges.push_back(0.0);
      for (auto it = geo.rbegin(); it != geo.rend(); ++it) edges.push_back(*it);
      a = c;
    }
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / pw - 1e-12)));
    for (int j = 0; j < n; ++j) edges.push_back(a + (b - a) * j / n);
  }
  edges.push_back(hi);
  return edges;
}

}  // namespace

double mode_radial_transform(const KernelConfig& cfg, int m, const RadialProfile& F, double tau, double r,
                             const ConvolutionQuad& quad) {
  if (!(tau > 0.0)) throw std::invalid_argument("mode_radial_transform requires tau > 0");
  if (!(r >= 0.0)) throw std::invalid_argument("mode_radial_transform requires r >= 0");
  if (r == 0.0) return 0.0;
  const double nu = mode_order(cfg, m);
  const double s = std::sqrt(tau);
  const double hw = quad.window_sigmas * s;
  const double lo = std::max(0.0, r - hw);
  const double hi = std::min(r + hw, F.support_end());
  if (!(hi > lo)) return 0.0;
  const auto cuts = F.breakpoints();
  const auto edges = window_edges(lo, hi, 2.0 * hw / quad.rho_panels, cuts, quad.vertex_ratio, quad.vertex_panels);
  const GaussRule& rule = gauss_legendre(quad.rho_points);
  const double inv4t = 0.25 / tau;
  const double zscale = r / (2.0 * tau);
  auto integrand = [&](double rho) {
    const double f = F(rho);
    if (f == 0.0) return 0.0;
    const double d = r - rho;
    return std::exp(-d * d * inv4t) * bessel_i_scaled(nu, zscale * rho, cfg.bessel_acc) * f * rho;
  };
  KahanSum acc;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] > edges[i]) acc.add(gauss_panel(rule, edges[i], edges[i + 1], integrand));
  }
  const double out = acc.value() / (2.0 * tau);
  if (!std::isfinite(out)) throw NonFinite("mode_radial_transform: non-finite result");
  return out;
}

double semigroup_apply(const KernelConfig& cfg, const SpatialField& g, double tau, PolarPoint x,
                       const ConvolutionQuad& quad) {
  double out = 0.0;
  for (const auto& mode : g.modes()) {
    const double sn = std::sin(mode_order(cfg, mode.m) * x.theta);
    if (sn != 0.0) out += sn * mode_radial_transform(cfg, mode.m, mode.radial, tau, x.r, quad);
  }
  return out;
}

double semigroup_apply_2d(const KernelConfig& cfg, const SpatialField& g, double tau, PolarPoint x,
                          int panels_per_sigma, int points, double window_sigmas, Exec ex) {
  if (!(tau > 0.0)) throw std::invalid_argument("semigroup_apply_2d requires tau > 0");
  if (g.is_zero()) return 0.0;
  const double k0 = cfg.domain.kappa0();
  const double s = std::sqrt(tau);
  const double w = window_sigmas * s;
  double support = 0.0;
  for (const auto& m : g.modes()) support = std::max(support, m.radial.support_end());
  const double r_lo = std::max(0.0, x.r - w);
  const double r_hi = std::min(x.r + w, support);
  if (!(r_hi > r_lo)) return 0.0;
  const double half_angle = r_lo > 0.0 ? std::min(k0, std::asin(std::min(1.0, w / x.r)) * 1.5) : k0;
  const double a_lo = std::max(0.0, x.theta - half_angle);
  const double a_hi = std::min(k0, x.theta + half_angle);

  std::vector<double> cuts;
  for (const auto& m : g.modes()) {
    const auto b = m.radial.breakpoints();
    if (b.size() < 16) cuts.insert(cuts.end(), b.begin(), b.end());
  }
  const auto redges = window_edges(r_lo, r_hi, s / panels_per_sigma, cuts, 0.25, 12);
  const int na = std::max(2, static_cast<int>(std::ceil((a_hi - a_lo) * r_hi / (s / panels_per_sigma))));
  const GaussRule& rule = gauss_legendre(points);
  std::vector<double> ang;
  std::vector<double> wang;
  for (int j = 0; j < na; ++j) {
    append_gauss_panel(a_lo + (a_hi - a_lo) * j / na, a_lo + (a_hi - a_lo) * (j + 1) / na, points, ang, wang);
  }
  const std::size_t n_panels = redges.size() - 1;
  std::vector<double> rows(n_panels * rule.nodes.size(), 0.0);
  for_each_index(rows.size(), ex, [&](std::size_t idx) {
    const std::size_t pnl = idx / rule.nodes.size();
    const std::size_t q = idx % rule.nodes.size();
    const double a = redges[pnl];
    const double b = redges[pnl + 1];
    if (!(b > a)) return;
    const double half = 0.5 * (b - a);
    const double rho = 0.5 * (a + b) + half * rule.nodes[q];
    KahanSum acc;
    for (std::size_t j = 0; j < ang.size(); ++j) {
      const PolarPoint y{rho, ang[j]};
      const double gv = g(k0, y);
      if (gv != 0.0) acc.add(heat_kernel(cfg, tau, x, y) * gv * wang[j]);
    }
    rows[idx] = acc.value() * rho * half * rule.weights[q];
  });
  return ordered_sum(rows);
}

// ---------------------------------------------------------------------------
// Lag histories

namespace {

// Mode transforms of one field at one radius on a lag grid. Each field gets
// its own grid (refined at its own switch lags), so contributions of
// separate terms or noise modes add exactly.
struct LagHistory {
  std::unique_ptr<PanelGrid> grid;
  std::vector<std::vector<double>> values;  // [mode][lag node]
};

LagHistory lag_history(const KernelConfig& cfg, const SpatialField& field, double r, double t_max,
                       const ConvolutionQuad& quad, std::span<const double> breaks) {
  LagHistory h;
  const double floor = std::max(quad.tau_floor_factor * r * r, 1e-14 * t_max);
  h.grid = std::make_unique<PanelGrid>(refined_time_grid(t_max, floor, breaks, quad.tau, false));
  const auto nodes = h.grid->nodes();
  for (const auto& mode : field.modes()) {
    std::vector<double> v(nodes.size());
    for (std::size_t l = 0; l < nodes.size(); ++l) v[l] = mode_radial_transform(cfg, mode.m, mode.radial, nodes[l], r, quad);
    h.values.push_back(std::move(v));
  }
  return h;
}

// sum_i a_i [P(t - s_i) - P(t - min(s_{i+1}, t))] for a running integral P
// in the lag variable.
double schedule_combination(const TimeSchedule& sched, double t, const CumulativeIntegral& P, bool squared) {
  double out = 0.0;
  const std::size_t n = sched.amplitudes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double s0 = i == 0 ? 0.0 : sched.switch_times[i - 1];
    if (s0 >= t) break;
    const double s1 = i + 1 < n ? std::min(sched.switch_times[i], t) : t;
    const double a = sched.amplitudes[i];
    out += (squared ? a * a : a) * (P(t - s0) - P(t - s1));
  }
  return out;
}

// Lags t_l - s_i at which schedule_combination evaluates running integrals;
// making them panel edges keeps those evaluations exact Gauss sums.
std::vector<double> switch_lags(std::span<const double> times, const std::vector<double>& switches) {
  std::vector<double> out;
  for (double t : times) {
    for (double s : switches) {
      if (s < t) out.push_back(t - s);
    }
  }
  return out;
}

double max_time(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("empty time list");
  double t = 0.0;
  for (double x : times) {
    if (!(x > 0.0)) throw std::invalid_argument("field times must be positive");
    t = std::max(t, x);
  }
  return t;
}

// Fills out[l][j] (row-major over times and angles) with v at one radius.
void det_row(const KernelConfig& cfg, const SourceSpec& src, double r, std::span<const double> angles,
             std::span<const double> times, const ConvolutionQuad& quad, double* out, std::size_t stride) {
  for (std::size_t l = 0; l < times.size(); ++l) {
    for (std::size_t j = 0; j < angles.size(); ++j) out[l * stride + j] = 0.0;
  }
  const double t_max = max_time(times);
  for (std::size_t f = 0; f < src.terms.size(); ++f) {
    const auto& term = src.terms[f];
    const LagHistory h = lag_history(cfg, term.field, r, t_max, quad, switch_lags(times, term.schedule.switch_times));
    const auto modes = term.field.modes();
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const CumulativeIntegral P(*h.grid, h.values[m]);
      const double nu = mode_order(cfg, modes[m].m);
      for (std::size_t l = 0; l < times.size(); ++l) {
        const double c = schedule_combination(term.schedule, times[l], P, false);
        for (std::size_t j = 0; j < angles.size(); ++j) out[l * stride + j] += c * std::sin(nu * angles[j]);
      }
    }
  }
}

void variance_row(const KernelConfig& cfg, const NoiseSpec& noise, double r, std::span<const double> angles,
                  std::span<const double> times, const ConvolutionQuad& quad, double* out, std::size_t stride) {
  for (std::size_t l = 0; l < times.size(); ++l) {
    for (std::size_t j = 0; j < angles.size(); ++j) out[l * stride + j] = 0.0;
  }
  const double t_max = max_time(times);
  for (std::size_t k = 0; k < noise.modes.size(); ++k) {
    const auto& nm = noise.modes[k];
    const LagHistory h = lag_history(cfg, nm.field, r, t_max, quad, switch_lags(times, nm.schedule.switch_times));
    const auto modes = nm.field.modes();
    for (std::size_t a = 0; a < modes.size(); ++a) {
      for (std::size_t b = a; b < modes.size(); ++b) {
        std::vector<double> prod(h.grid->size());
        for (std::size_t l = 0; l < prod.size(); ++l) prod[l] = h.values[a][l] * h.values[b][l];
        const CumulativeIntegral C(*h.grid, prod);
        const double na = mode_order(cfg, modes[a].m);
        const double nb = mode_order(cfg, modes[b].m);
        const double mult = a == b ? 1.0 : 2.0;
        for (std::size_t l = 0; l < times.size(); ++l) {
          const double d = mult * schedule_combination(nm.schedule, times[l], C, true);
          for (std::size_t j = 0; j < angles.size(); ++j) {
            out[l * stride + j] += d * std::sin(na * angles[j]) * std::sin(nb * angles[j]);
          }
        }
      }
    }
  }
  // Interpolated running integrals can dip a rounding error below zero.
  for (std::size_t l = 0; l < times.size(); ++l) {
    for (std::size_t j = 0; j < angles.size(); ++j) out[l * stride + j] = std::max(0.0, out[l * stride + j]);
  }
}

template <class RowFn>
SpaceTimeField space_time_field(std::span<const double> times, const PolarGrid& grid, Exec ex, RowFn&& row) {
  SpaceTimeField f{std::vector<double>(times.begin(), times.end()), grid,
                   std::vector<double>(times.size() * grid.size())};
  const std::size_t nt = grid.n_theta();
  const std::size_t stride = grid.size();
  for_each_index(grid.n_r(), ex, [&](std::size_t i) { row(grid.radii()[i], f.values.data() + i * nt, stride); });
  return f;
}

}  // namespace

double det_convolve(const KernelConfig& cfg, const SourceSpec& src, double t, PolarPoint x,
                    const ConvolutionQuad& quad) {
  src.validate();
  quad.validate();
  if (src.terms.empty()) return 0.0;
  const double times[1] = {t};
  const double angles[1] = {x.theta};
  double out = 0.0;
  det_row(cfg, src, x.r, angles, times, quad, &out, 1);
  return out;
}

SpaceTimeField det_field(const KernelConfig& cfg, const SourceSpec& src, std::span<const double> times,
                         const PolarGrid& grid, const ConvolutionQuad& quad, Exec ex) {
  src.validate();
  quad.validate();
  return space_time_field(times, grid, ex, [&](double r, double* out, std::size_t stride) {
    det_row(cfg, src, r, grid.angles(), times, quad, out, stride);
  });
}

VarianceField variance_field(const KernelConfig& cfg, const NoiseSpec& noise, std::span<const double> times,
                             const PolarGrid& grid, const ConvolutionQuad& quad, Exec ex) {
  noise.validate();
  quad.validate();
  return space_time_field(times, grid, ex, [&](double r, double* out, std::size_t stride) {
    variance_row(cfg, noise, r, grid.angles(), times, quad, out, stride);
  });
}

double variance_at(const KernelConfig& cfg, const NoiseSpec& noise, double t, PolarPoint x,
                   const ConvolutionQuad& quad) {
  noise.validate();
  quad.validate();
  const double times[1] = {t};
  const double angles[1] = {x.theta};
  double out = 0.0;
  variance_row(cfg, noise, x.r, angles, times, quad, &out, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Weighted space-time integrals

double RadialRows::total() const { return ordered_sum(rows); }

double RadialRows::above(double delta) const {
  KahanSum acc;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (radii[i] > delta) acc.add(rows[i]);
  }
  return acc.value();
}

namespace {

// rows[i] = sum_l tw_l sum_j integrand(l, i, j) wt_j * r_i^e * r_i * wr_i.
template <class F>
RadialRows space_time_rows(const PolarGrid& grid, std::span<const double> time_weights, double exponent, Exec ex,
                           F&& integrand) {
  RadialRows out{std::vector<double>(grid.radii().begin(), grid.radii().end()), std::vector<double>(grid.n_r())};
  const auto wt = grid.angular_weights();
  const auto wr = grid.radial_weights();
  for_each_index(grid.n_r(), ex, [&](std::size_t i) {
    KahanSum acc;
    for (std::size_t l = 0; l < time_weights.size(); ++l) {
      KahanSum row;
      for (std::size_t j = 0; j < grid.n_theta(); ++j) {
        const double v = integrand(l, i, j);
        if (!std::isfinite(v)) throw NonFinite("non-finite space-time integrand at r=" + std::to_string(out.radii[i]));
        row.add(v * wt[j]);
      }
      acc.add(time_weights[l] * row.value());
    }
    const double r = out.radii[i];
    out.rows[i] = acc.value() * std::pow(r, exponent) * r * wr[i];
  });
  return out;
}

void check_time_weights(const SpaceTimeField& f, std::span<const double> tw) {
  if (tw.size() != f.times.size()) throw std::invalid_argument("time_weights must match the field's times");
}

}  // namespace

RadialRows lhs_rows(const VarianceField& var, const WeightParams& w, std::span<const double> time_weights, Exec ex) {
  if (!(w.p >= 2.0)) throw std::invalid_argument("lhs_weighted_moment requires p >= 2");
  check_time_weights(var, time_weights);
  const double moment = gaussian_abs_moment(w.p);
  const std::size_t nt = var.grid.n_theta();
  RadialRows rows = space_time_rows(var.grid, time_weights, w.theta - 2.0 - w.p, ex, [&](std::size_t l, std::size_t i, std::size_t j) {
    return std::pow(var.at(l, i * nt + j), 0.5 * w.p);
  });
  for (double& r : rows.rows) r *= moment;
  return rows;
}

double lhs_weighted_moment(const VarianceField& var, const WeightParams& w, std::span<const double> time_weights,
                           Exec ex) {
  return lhs_rows(var, w, time_weights, ex).total();
}

RadialRows rhs_g_rows(const NoiseSpec& noise, const WeightParams& w, const PolarGrid& grid,
                      std::span<const double> times, std::span<const double> time_weights, Exec ex) {
  noise.validate();
  if (times.size() != time_weights.size()) throw std::invalid_argument("times and time_weights differ in size");
  const double k0 = grid.domain().kappa0();
  const std::size_t nt = grid.n_theta();
  return space_time_rows(grid, time_weights, w.theta - 2.0, ex, [&](std::size_t l, std::size_t i, std::size_t j) {
    return std::pow(noise.l2_norm(k0, times[l], grid.point(i * nt + j)), w.p);
  });
}

double rhs_g_norm(const NoiseSpec& noise, const WeightParams& w, const PolarGrid& grid, std::span<const double> times,
                  std::span<const double> time_weights, Exec ex) {
  return rhs_g_rows(noise, w, grid, times, time_weights, ex).total();
}

RadialRows det_lhs_rows(const SpaceTimeField& v, const WeightParams& w, std::span<const double> time_weights, Exec ex) {
  check_time_weights(v, time_weights);
  const std::size_t nt = v.grid.n_theta();
  return space_time_rows(v.grid, time_weights, w.theta - 2.0 - w.p, ex, [&](std::size_t l, std::size_t i, std::size_t j) {
    return std::pow(std::fabs(v.at(l, i * nt + j)), w.p);
  });
}

RadialRows det_rhs_rows(const SourceSpec& src, const WeightParams& w, const PolarGrid& grid,
                        std::span<const double> times, std::span<const double> time_weights, Exec ex) {
  src.validate();
  if (times.size() != time_weights.size()) throw std::invalid_argument("times and time_weights differ in size");
  const double k0 = grid.domain().kappa0();
  const std::size_t nt = grid.n_theta();
  return space_time_rows(grid, time_weights, w.theta - 2.0 + w.p, ex, [&](std::size_t l, std::size_t i, std::size_t j) {
    return std::pow(std::fabs(src(k0, times[l], grid.point(i * nt + j))), w.p);
  });
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  std::uint64_t t = stream ^ a;
  state_ = splitmix64(t) ^ a;
}

std::uint64_t NormalStream::next_u64() { return splitmix64(state_); }

double NormalStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Uniforms in (0, 1] from the top 53 bits.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  spare_ = rad * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return rad * std::cos(2.0 * kPi * u2);
}

McResult mc_sample_w(const KernelConfig& cfg, const NoiseSpec& noise, double t, std::span<const PolarPoint> probes,
                     std::size_t n_paths, std::uint64_t seed, double p, const ConvolutionQuad& quad, Exec ex) {
  noise.validate();
  quad.validate();
  if (n_paths < 100) throw std::invalid_argument("mc_sample_w requires n_paths >= 100");
  if (!(t > 0.0)) throw std::invalid_argument("mc_sample_w requires t > 0");
  if (!(p >= 1.0)) throw std::invalid_argument("mc_sample_w requires p >= 1");
  if (probes.empty()) throw std::invalid_argument("mc_sample_w needs at least one probe");
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& x : probes) r_min = std::min(r_min, x.r);
  std::vector<double> breaks;
  for (double s : noise.switch_times()) {
    if (s < t) breaks.push_back(t - s);
  }
  const double floor = std::max(quad.tau_floor_factor * r_min * r_min, 1e-14 * t);
  const PanelGrid grid = refined_time_grid(t, floor, breaks, quad.tau, false);
  const auto nodes = grid.nodes();
  const auto weights = grid.weights();
  const std::size_t L = nodes.size();
  const std::size_t K = noise.modes.size();
  const std::size_t P = probes.size();

  // coeff[(p * K + k) * L + l] = a_k(t - tau_l) h_k(tau_l, x_p) sqrt(omega_l)
  std::vector<double> coeff(P * K * L, 0.0);
  for_each_index(P * K * L, ex, [&](std::size_t idx) {
    const std::size_t l = idx % L;
    const std::size_t k = (idx / L) % K;
    const std::size_t pr = idx / (L * K);
    const double a = noise.modes[k].schedule(t - nodes[l]);
    if (a == 0.0) return;
    const double h = semigroup_apply(cfg, noise.modes[k].field, nodes[l], probes[pr], quad);
    coeff[idx] = a * h * std::sqrt(weights[l]);
  });

  std::vector<double> samples(n_paths * P);
  for_each_index(n_paths, ex, [&](std::size_t path) {
    NormalStream rng(seed, path);
    std::vector<double> xi(K * L);
    for (double& v : xi) v = rng.next_normal();
    for (std::size_t pr = 0; pr < P; ++pr) {
      double w = 0.0;
      const double* c = coeff.data() + pr * K * L;
      for (std::size_t q = 0; q < K * L; ++q) w += c[q] * xi[q];
      samples[path * P + pr] = w;
    }
  });

  McResult res{{}, n_paths};
  const double n = static_cast<double>(n_paths);
  for (std::size_t pr = 0; pr < P; ++pr) {
    KahanSum m1, m2, s2, s4, s8;
    for (std::size_t path = 0; path < n_paths; ++path) {
      const double w = samples[path * P + pr];
      const double a = std::pow(std::fabs(w), p);
      m1.add(a);
      m2.add(a * a);
      const double w2 = w * w;
      s2.add(w2);
      s4.add(w2 * w2);
      s8.add(w2 * w2 * w2 * w2);
    }
    McProbe out{};
    out.abs_moment = m1.value() / n;
    out.abs_moment_se = std::sqrt(std::max(0.0, m2.value() / n - out.abs_moment * out.abs_moment) / (n - 1.0));
    out.variance = s2.value() / n;
    out.variance_se = std::sqrt(std::max(0.0, s4.value() / n - out.variance * out.variance) / (n - 1.0));
    out.kurtosis = out.variance > 0.0 ? s4.value() / n / (out.variance * out.variance) : 0.0;
    out.kurtosis_se = std::sqrt(24.0 / n);
    KahanSum qv;
    for (std::size_t q = 0; q < K * L; ++q) {
      const double c = coeff[pr * K * L + q];
      qv.add(c * c);
    }
    out.quad_variance = qv.value();
    res.probes.push_back(out);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Counterexample

void CounterexampleSpec::validate() const {
  if (!(kappa0 > 0.0 && kappa0 <= 2.0 * kPi)) throw std::invalid_argument("CounterexampleSpec.kappa0 must lie in (0, 2*pi]");
  if (!(T > 0.0)) throw std::invalid_argument("CounterexampleSpec.T must be > 0");
  if (!(p >= 2.0)) throw std::invalid_argument("CounterexampleSpec.p must be >= 2");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("CounterexampleSpec.epsilon must lie in (0, 1]");
  if (!std::isfinite(theta)) throw std::invalid_argument("CounterexampleSpec.theta must be finite");
  double prev = std::numeric_limits<double>::infinity();
  for (double d : delta_sequence) {
    if (!(d > 0.0 && d < prev)) throw std::invalid_argument("delta_sequence must be positive and strictly decreasing");
    prev = d;
  }
}

double CounterexampleSpec::q() const { return (kPi / kappa0 - 1.0) * p + theta; }

double counterexample_constant(const CounterexampleSpec& spec) {
  spec.validate();
  const TimeQuadSpec tq{24, 8, 0.5, 4};
  const double half_p = 0.5 * spec.p;
  const double time = PanelGrid::accumulating_left(tq, 0.0, spec.T).integrate([&](double t) { return std::pow(t, half_p); });
  const double e = kPi / spec.kappa0;
  auto ang = [&](double th) { return std::pow(std::fabs(std::sin(e * th)), spec.p); };
  const double mid = 0.5 * spec.kappa0;
  const double angle = PanelGrid::accumulating_left(tq, 0.0, mid).integrate(ang) +
                       PanelGrid::accumulating_right(tq, mid, spec.kappa0).integrate(ang);
  return gaussian_abs_moment(spec.p) * time * angle;
}

namespace {

// log of int_delta^eps r^{q-1} dr.
double log_radial(double q, double eps, double delta) {
  if (q == 0.0) return std::log(std::log(eps / delta));
  if (q > 0.0) return q * std::log(eps) + std::log(-std::expm1(q * std::log(delta / eps))) - std::log(q);
  return q * std::log(delta) + std::log(-std::expm1(q * std::log(eps / delta))) - std::log(-q);
}

}  // namespace

double counterexample_log_integral(const CounterexampleSpec& spec, double delta) {
  spec.validate();
  if (!(delta > 0.0 && delta < spec.epsilon)) throw std::invalid_argument("counterexample_integral requires 0 < delta < epsilon");
  return std::log(counterexample_constant(spec)) + log_radial(spec.q(), spec.epsilon, delta);
}

double counterexample_integral(const CounterexampleSpec& spec, double delta) {
  const double v = std::exp(counterexample_log_integral(spec, delta));
  if (!std::isfinite(v)) throw NonFinite("counterexample_integral overflows; use counterexample_log_integral");
  return v;
}

}  // namespace wedgeheat
