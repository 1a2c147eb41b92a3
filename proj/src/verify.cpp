#include "wedgeheat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "wedgeheat/convolution.hpp"
#include "wedgeheat/errors.hpp"
#include "wedgeheat/fields.hpp"
#include "wedgeheat/gauss.hpp"
#include "wedgeheat/quadrature.hpp"

namespace wedgeheat {

namespace {

double uniform01(NormalStream& rng) { return static_cast<double>(rng.next_u64() >> 11) * 0x1.0p-53; }

double log_uniform(NormalStream& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, uniform01(rng));
}

double squared_distance(PolarPoint x, PolarPoint y) {
  const auto [a, b] = polar_to_cart(x);
  const auto [c, d] = polar_to_cart(y);
  return (a - c) * (a - c) + (b - d) * (b - d);
}

void require_range(double lo, double hi, const char* what) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument(std::string(what) + " needs 0 < min < max");
}

// Guards against filters that reject (almost) everything.
constexpr std::size_t kMaxDrawsPerSample = 10000;

template <class F>
double gauss_panel(const GaussRule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return s * half;
}

struct LineFit {
  double slope;
  double intercept;
};

LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

// ---------------------------------------------------------------------------
// Sample clouds

void CloudSpec::validate() const {
  if (n == 0) throw std::invalid_argument("CloudSpec.n must be positive");
  require_range(t_min, t_max, "CloudSpec t range");
  require_range(r_min, r_max, "CloudSpec radius range");
  if (!(angle_margin >= 0.0 && angle_margin < 0.5)) throw std::invalid_argument("CloudSpec.angle_margin in [0, 0.5)");
  if (!(max_q > 0.0) || !(max_bessel_arg > 0.0)) throw std::invalid_argument("CloudSpec filters must be positive");
}

void VertexCloudSpec::validate() const {
  if (n_configs == 0) throw std::invalid_argument("VertexCloudSpec.n_configs must be positive");
  if (decade_max <= decade_min) throw std::invalid_argument("VertexCloudSpec needs decade_min < decade_max");
  require_range(t_min, t_max, "VertexCloudSpec t range");
  require_range(r_min, r_max, "VertexCloudSpec radius range");
  require_range(partner_min, partner_max, "VertexCloudSpec partner range");
  if (!(angle_margin >= 0.0 && angle_margin < 0.5)) {
    throw std::invalid_argument("VertexCloudSpec.angle_margin in [0, 0.5)");
  }
  if (!(max_q > 0.0)) throw std::invalid_argument("VertexCloudSpec.max_q must be positive");
}

KernelCloud sample_kernel_cloud(const AngularDomain& domain, const CloudSpec& spec) {
  spec.validate();
  NormalStream rng(spec.seed, 0x636c6f7564ULL);
  const double k0 = domain.kappa0();
  const double span = 1.0 - 2.0 * spec.angle_margin;
  KernelCloud out;
  while (out.samples.size() < spec.n) {
    if (out.rejected > kMaxDrawsPerSample * spec.n) {
      throw std::invalid_argument("sample_kernel_cloud: filters reject almost every draw");
    }
    const double t = log_uniform(rng, spec.t_min, spec.t_max);
    const PolarPoint x{log_uniform(rng, spec.r_min, spec.r_max), k0 * (spec.angle_margin + span * uniform01(rng))};
    const PolarPoint y{log_uniform(rng, spec.r_min, spec.r_max), k0 * (spec.angle_margin + span * uniform01(rng))};
    if (squared_distance(x, y) / (4.0 * t) > spec.max_q || x.r * y.r / (2.0 * t) > spec.max_bessel_arg) {
      ++out.rejected;
      continue;
    }
    out.samples.push_back({t, x, y});
  }
  return out;
}

KernelCloud sample_vertex_cloud(const AngularDomain& domain, const VertexCloudSpec& spec) {
  spec.validate();
  NormalStream rng(spec.seed, 0x766572746578ULL);
  const double k0 = domain.kappa0();
  const double span = 1.0 - 2.0 * spec.angle_margin;
  const int nd = spec.decade_max - spec.decade_min;
  KernelCloud out;
  std::size_t configs = 0;
  std::vector<KernelSample> replicas;
  while (configs < spec.n_configs) {
    if (out.rejected > kMaxDrawsPerSample * spec.n_configs) {
      throw std::invalid_argument("sample_vertex_cloud: filters reject almost every configuration");
    }
    const double u = log_uniform(rng, 1.0, 10.0);
    const double partner = log_uniform(rng, spec.partner_min, spec.partner_max);
    const double tx = k0 * (spec.angle_margin + span * uniform01(rng));
    const double ty = k0 * (spec.angle_margin + span * uniform01(rng));
    replicas.clear();
    for (int k = spec.decade_min; k < spec.decade_max; ++k) {
      const double sk = u * std::pow(10.0, k);
      const double t_lo = std::max({spec.t_min, std::pow(spec.r_min / sk, 2), std::pow(spec.r_min / partner, 2)});
      const double t_hi = std::min({spec.t_max, std::pow(spec.r_max / sk, 2), std::pow(spec.r_max / partner, 2)});
      const double t = t_lo < t_hi ? log_uniform(rng, t_lo, t_hi) : t_lo;
      const double h = std::sqrt(t);
      const PolarPoint x{sk * h, tx};
      const PolarPoint y{partner * h, ty};
      if (!(t_lo <= t_hi) || squared_distance(x, y) / (4.0 * t) > spec.max_q) break;
      replicas.push_back({t, x, y});
    }
    if (static_cast<int>(replicas.size()) != nd) {
      ++out.rejected;
      continue;
    }
    out.samples.insert(out.samples.end(), replicas.begin(), replicas.end());
    ++configs;
  }
  return out;
}

GreenBoundCloud sample_green_bound_cloud(const AngularDomain& domain, std::uint64_t seed, std::size_t n_general,
                                         std::size_t n_configs) {
  CloudSpec general;
  general.n = n_general;
  general.t_min = 1e-4;
  general.t_max = 1e2;
  general.r_min = 1e-6;
  general.r_max = 1e2;
  general.seed = seed;
  VertexCloudSpec vertex;
  vertex.n_configs = n_configs;
  vertex.seed = seed;
  return {sample_kernel_cloud(domain, general), sample_vertex_cloud(domain, vertex)};
}

// ---------------------------------------------------------------------------
// Kernel identities

void CkQuad::validate() const {
  if (!(window_sigmas >= 4.0)) throw std::invalid_argument("CkQuad.window_sigmas must be >= 4");
  if (n_radial < 2 || n_angular < 2 || points_per_cell < 1) {
    throw std::invalid_argument("CkQuad needs n_radial, n_angular >= 2 and points_per_cell >= 1");
  }
}

CkQuad CkQuad::refined() const {
  CkQuad q = *this;
  q.n_radial *= 2;
  q.n_angular *= 2;
  return q;
}

CkResult check_chapman_kolmogorov(const KernelConfig& cfg, double t, double s, PolarPoint x, PolarPoint y,
                                  const CkQuad& quad, Exec ex) {
  cfg.validate();
  quad.validate();
  if (!(t > 0.0) || !(s > 0.0)) throw std::invalid_argument("check_chapman_kolmogorov requires t, s > 0");
  const double rhs = heat_kernel(cfg, t + s, x, y);
  const double wt = quad.window_sigmas * std::sqrt(t);
  const double ws = quad.window_sigmas * std::sqrt(s);
  const double lo = std::max({x.r - wt, y.r - ws, 0.0});
  const double hi = std::min(x.r + wt, y.r + ws);
  double lhs = 0.0;
  if (hi > lo) {
    GridSpec g;
    g.r_max = hi;
    g.n_radial = quad.n_radial;
    g.n_angular = quad.n_angular;
    g.points_per_cell = quad.points_per_cell;
    if (lo < 0.05 * hi) {
      // The integrand vanishes like rho^{2 pi/kappa0 + 1} at the vertex.
      g.r_min = 1e-12 * hi;
      g.grading_exponent = 2.0;
    } else {
      g.r_min = lo;
      g.grading_exponent = 1.0;
    }
    const PolarGrid grid(cfg.domain, g);
    lhs = integrate_polar_weighted(
        grid, [&](PolarPoint z) { return heat_kernel(cfg, t, x, z) * heat_kernel(cfg, s, z, y); }, 0.0, ex);
  }
  CkResult out{lhs, rhs, 0.0, false};
  if (rhs < 1e-300 && lhs < 1e-300) {
    out.underflow = true;
  } else {
    out.residual = std::fabs(lhs - rhs) / rhs;
  }
  return out;
}

double check_dilation(const KernelConfig& cfg, double a, double t, PolarPoint x, PolarPoint y) {
  if (!(a > 0.0)) throw std::invalid_argument("check_dilation requires a > 0");
  const double g = heat_kernel(cfg, t, x, y);
  const double scaled = a * a * heat_kernel(cfg, a * a * t, {a * x.r, x.theta}, {a * y.r, y.theta});
  if (g == 0.0) return scaled == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::fabs(scaled - g) / g;
}

// ---------------------------------------------------------------------------
// Kozlov bound

void GreenBoundOptions::validate() const {
  if (sigma_grid.empty()) throw std::invalid_argument("GreenBoundOptions.sigma_grid must not be empty");
  for (double s : sigma_grid) {
    if (!(s > 0.0 && s <= 0.25)) throw std::invalid_argument("sigma must lie in (0, 1/4]");
  }
  if (!(stability_factor > 1.0)) throw std::invalid_argument("GreenBoundOptions.stability_factor must be > 1");
  if (!(profile_fit_max > 0.0)) throw std::invalid_argument("GreenBoundOptions.profile_fit_max must be > 0");
  if (!(q_bins[0] > 0.0 && q_bins[1] > q_bins[0] && q_bins[2] > q_bins[1])) {
    throw std::invalid_argument("GreenBoundOptions.q_bins must be increasing and positive");
  }
}

double GreenBoundFit::decade_growth(std::size_t k) const {
  if (k >= profile.size()) throw std::out_of_range("GreenBoundFit::decade_growth: not enough decades");
  return profile[0].max_ratio / profile[k].max_ratio;
}

namespace {

struct SigmaEvaluation {
  SigmaTrial trial;
  std::vector<DecadeRatio> profile;
  double slope;
  std::size_t excluded;
};

struct Ratios {
  std::vector<double> ratio;  // NaN where excluded
  std::size_t excluded = 0;
};

Ratios bound_ratios(std::span<const KernelSample> cloud, std::span<const double> g, double lambda, double sigma,
                    double underflow) {
  Ratios out;
  out.ratio.resize(cloud.size());
  const double log_floor = std::log(underflow);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& smp = cloud[i];
    const double denom_scale = smp.x.r + smp.y.r + std::sqrt(smp.t);
    const double log_den = lambda * (std::log(smp.x.r / denom_scale) + std::log(smp.y.r / denom_scale));
    const double d2 = squared_distance(smp.x, smp.y);
    if (!(g[i] * smp.t >= underflow) && log_den < log_floor) {
      out.ratio[i] = std::numeric_limits<double>::quiet_NaN();
      ++out.excluded;
      continue;
    }
    out.ratio[i] = g[i] > 0.0 ? std::exp(std::log(g[i] * smp.t) + sigma * d2 / smp.t - log_den) : 0.0;
  }
  return out;
}

SigmaEvaluation evaluate_sigma(const GreenBoundCloud& cloud, std::span<const double> g_general,
                               std::span<const double> g_vertex, double lambda, double sigma,
                               const GreenBoundOptions& opt) {
  const Ratios general = bound_ratios(cloud.general.samples, g_general, lambda, sigma, opt.underflow);
  const Ratios vertex = bound_ratios(cloud.vertex.samples, g_vertex, lambda, sigma, opt.underflow);
  double sup = 0.0;
  std::array<double, 3> q_max{0.0, 0.0, 0.0};
  std::array<std::size_t, 3> q_count{0, 0, 0};
  auto visit = [&](std::span<const KernelSample> samples, const Ratios& r) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (std::isnan(r.ratio[i])) continue;
      sup = std::max(sup, r.ratio[i]);
      const double q = squared_distance(samples[i].x, samples[i].y) / (4.0 * samples[i].t);
      for (std::size_t b = 0; b < 3; ++b) {
        if (q <= opt.q_bins[b]) {
          q_max[b] = std::max(q_max[b], r.ratio[i]);
          ++q_count[b];
          break;
        }
      }
    }
  };
  visit(cloud.general.samples, general);
  visit(cloud.vertex.samples, vertex);

  std::map<int, DecadeRatio> decades;
  for (std::size_t i = 0; i < cloud.vertex.samples.size(); ++i) {
    if (std::isnan(vertex.ratio[i])) continue;
    const auto& smp = cloud.vertex.samples[i];
    const double s = std::min(smp.x.r, smp.y.r) / std::sqrt(smp.t);
    const int k = static_cast<int>(std::floor(std::log10(s)));
    auto [it, fresh] = decades.try_emplace(k, DecadeRatio{std::pow(10.0, k), 0.0, 0});
    it->second.max_ratio = std::max(it->second.max_ratio, vertex.ratio[i]);
    ++it->second.count;
  }
  SigmaEvaluation ev;
  ev.excluded = general.excluded + vertex.excluded;
  for (const auto& [k, d] : decades) {
    if (d.count >= opt.min_decade_count) ev.profile.push_back(d);
  }
  std::vector<double> xs, ys;
  for (const auto& d : ev.profile) {
    if (10.0 * d.r_scale <= opt.profile_fit_max * (1.0 + 1e-12) && d.max_ratio > 0.0) {
      xs.push_back(std::log10(d.r_scale) + 0.5);
      ys.push_back(std::log10(d.max_ratio));
    }
  }
  ev.slope = xs.size() >= 2 ? least_squares(xs, ys).slope : std::numeric_limits<double>::quiet_NaN();
  bool stable = ev.profile.size() >= 2 && std::isfinite(ev.slope) && ev.slope >= opt.min_slope &&
                ev.profile[0].max_ratio < opt.stability_factor * ev.profile[1].max_ratio;
  if (q_count[2] >= opt.min_decade_count && q_count[1] >= opt.min_decade_count) {
    stable = stable && q_max[2] < opt.stability_factor * q_max[1];
  }
  ev.trial = {sigma, sup, stable};
  return ev;
}

}  // namespace

GreenBoundFit fit_green_bound(const KernelConfig& cfg, double lambda, const GreenBoundCloud& cloud,
                              const GreenBoundOptions& opt, Exec ex) {
  opt.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("fit_green_bound requires lambda >= 0");
  if (cloud.vertex.samples.empty()) throw std::invalid_argument("fit_green_bound requires a vertex cloud");
  for (const auto* part : {&cloud.general.samples, &cloud.vertex.samples}) {
    for (const auto& s : *part) {
      if (!(s.x.r > 0.0) || !(s.y.r > 0.0)) throw std::invalid_argument("fit_green_bound: cloud touches the vertex");
    }
  }
  const std::vector<double> g_general = kernel_cloud(cfg, cloud.general.samples, ex);
  const std::vector<double> g_vertex = kernel_cloud(cfg, cloud.vertex.samples, ex);

  std::vector<double> grid = opt.sigma_grid;
  std::sort(grid.begin(), grid.end());
  std::vector<SigmaEvaluation> evals;
  for (double sigma : grid) evals.push_back(evaluate_sigma(cloud, g_general, g_vertex, lambda, sigma, opt));
  // Once the sup jumps by stability_factor between neighbouring sigmas the
  // exponential weight has overtaken the kernel's Gaussian decay.
  for (std::size_t i = 1; i < evals.size(); ++i) {
    if (!evals[i - 1].trial.stable || evals[i].trial.sup_ratio >= opt.stability_factor * evals[i - 1].trial.sup_ratio) {
      for (std::size_t j = i; j < evals.size(); ++j) evals[j].trial.stable = false;
      break;
    }
  }
  std::size_t pick = 0;
  bool bounded = false;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (evals[i].trial.stable && (!bounded || evals[i].trial.sigma > evals[pick].trial.sigma)) {
      pick = i;
      bounded = true;
    }
  }
  if (!bounded) pick = 0;
  GreenBoundFit fit;
  fit.lambda = lambda;
  fit.sigma = evals[pick].trial.sigma;
  fit.sup_ratio = evals[pick].trial.sup_ratio;
  fit.sample_size = cloud.general.samples.size() + cloud.vertex.samples.size();
  fit.excluded = evals[pick].excluded;
  fit.bounded = bounded;
  fit.profile = evals[pick].profile;
  fit.profile_slope = evals[pick].slope;
  for (const auto& e : evals) fit.trials.push_back(e.trial);
  return fit;
}

VertexDecay vertex_decay_exponent(const KernelConfig& cfg, double t, PolarPoint y0,
                                  std::span<const double> r_samples) {
  if (r_samples.size() < 3) throw std::invalid_argument("vertex_decay_exponent needs at least 3 radii");
  VertexDecay out{0.0, 0.0, false, {}};
  std::vector<double> xs, ys;
  const double mid = 0.5 * cfg.domain.kappa0();
  for (double r : r_samples) {
    if (!(r > 0.0)) throw std::invalid_argument("vertex_decay_exponent: radii must be positive");
    const double g = heat_kernel(cfg, t, {r, mid}, y0);
    out.values.push_back(g);
    if (g < 1e-250) {
      out.underflow = true;
      continue;
    }
    xs.push_back(std::log(r));
    ys.push_back(std::log(g));
  }
  if (xs.size() < 2) throw NonFinite("vertex_decay_exponent: kernel underflows at almost every radius");
  const auto fit = least_squares(xs, ys);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  return out;
}

// ---------------------------------------------------------------------------
// Proof integrals

ProofIntegralParams ProofIntegralParams::from_weights(double p, double theta, double kappa0,
                                                      std::optional<double> epsilon) {
  if (!(p >= 2.0)) throw std::invalid_argument("ProofIntegralParams requires p >= 2");
  if (!theta_admissible_range(p, kappa0).contains(theta)) {
    throw std::invalid_argument("ProofIntegralParams: theta outside the admissible range");
  }
  ProofIntegralParams out{};
  out.p = p;
  out.theta = theta;
  out.kappa0 = kappa0;
  const DerivedParams d = derive(WeightParams{p, theta});
  out.mu = d.mu;
  out.p_dual = d.p_dual;
  const double two_over_pd = 2.0 / d.p_dual;
  const double nu = kPi / kappa0;
  const double slack = nu - std::fabs(out.mu - two_over_pd);
  const double eps = epsilon.value_or(0.5 * slack);
  if (!(eps > 0.0 && eps < slack)) {
    throw std::invalid_argument("ProofIntegralParams: epsilon must lie in (0, " + std::to_string(slack) + ")");
  }
  out.lambda = nu - eps;
  out.alpha = 0.5 * (out.mu + out.lambda - two_over_pd);
  out.beta = 0.5 * (-out.mu + out.lambda + two_over_pd);
  out.b = out.alpha * p - 2.0;
  if (out.b < 0.0) out.beta_prime = -out.b;
  if (!out.satisfies_conditions()) throw std::logic_error("ProofIntegralParams: constructed exponents fail");
  return out;
}

bool ProofIntegralParams::satisfies_conditions() const {
  const double two_over_pd = 2.0 / p_dual;
  const bool lam = two_over_pd - lambda < mu && mu < two_over_pd + lambda &&
                   lambda > 0.0 && lambda < kPi / kappa0;
  const bool ab = alpha > 0.0 && alpha < mu + lambda - two_over_pd && beta > 0.0 && beta < -mu + lambda + two_over_pd;
  const bool bp = !beta_prime || (*beta_prime > 0.0 && *beta_prime < 2.0);
  return lam && ab && b > -2.0 && time_tail_exponent() > 2.0 && bp;
}

void SupIntegralQuad::validate() const {
  if (radial_points < 2 || angular_points < 8) {
    throw std::invalid_argument("SupIntegralQuad needs radial_points >= 2 and angular_points >= 8");
  }
  if (!(panel_ratio > 0.0 && panel_ratio < 1.0)) throw std::invalid_argument("SupIntegralQuad.panel_ratio in (0,1)");
  if (!(inner_radius > 0.0 && inner_radius < 0.1)) {
    throw std::invalid_argument("SupIntegralQuad.inner_radius in (0, 0.1)");
  }
  if (!(gaussian_radius >= 6.0) || !(far_center > gaussian_radius)) {
    throw std::invalid_argument("SupIntegralQuad needs gaussian_radius >= 6 and far_center > gaussian_radius");
  }
}

SupIntegralQuad SupIntegralQuad::refined() const {
  SupIntegralQuad q = *this;
  q.radial_points *= 2;
  q.angular_points *= 2;
  q.panel_ratio = std::sqrt(panel_ratio);
  return q;
}

double sup_integrand_integral(double b, double c, std::array<double, 2> x, const SupIntegralQuad& quad,
                              double cutoff) {
  quad.validate();
  if (!(c > 0.0)) throw std::invalid_argument("sup_integrand_integral requires c > 0");
  if (!(cutoff >= 0.0)) throw std::invalid_argument("sup_integrand_integral: cutoff must be >= 0");
  const double xn = std::hypot(x[0], x[1]);
  const double z0x = x[0] / c, z0y = x[1] / c;
  const double z0n = xn / c;
  const bool centred = z0n < quad.far_center;
  const GaussRule& rule = gauss_legendre(quad.radial_points);
  const int na = quad.angular_points;
  const double dphi = 2.0 * kPi / na;

  auto ratio_pow = [&](double z1, double z2) {
    const double d = std::hypot(x[0] - c * z1, x[1] - c * z2);
    return b == 0.0 ? 1.0 : std::pow(d / (xn + d + c), b);
  };
  double cx = 0.0, cy = 0.0;
  if (centred) {
    cx = z0x;
    cy = z0y;
  }
  // Trapezoid rule in the angle (periodic, analytic integrand) times rho.
  auto ring = [&](double rho) {
    double s = 0.0;
    for (int j = 0; j < na; ++j) {
      const double phi = j * dphi;
      const double z1 = cx + rho * std::cos(phi);
      const double z2 = cy + rho * std::sin(phi);
      s += std::exp(-(z1 * z1 + z2 * z2)) * ratio_pow(z1, z2);
    }
    return s * dphi * rho;
  };

  std::vector<double> edges;
  double core = 0.0;
  if (centred) {
    const double outer = z0n + quad.gaussian_radius;
    const double inner = cutoff > 0.0 ? cutoff : quad.inner_radius;
    if (inner >= outer) return 0.0;
    for (double e = inner; e < 1.0; e /= quad.panel_ratio) edges.push_back(e);
    for (double e = 1.0; e < outer; e += 1.0) edges.push_back(e);
    edges.push_back(outer);
    if (cutoff == 0.0) {
      // Near x/c the factor is (c rho / (|x| + c))^b up to O(rho).
      if (b <= -2.0) return std::numeric_limits<double>::infinity();
      const double scale = b == 0.0 ? 1.0 : std::pow(c / (xn + c), b);
      core = 2.0 * kPi * std::exp(-z0n * z0n) * scale * std::pow(inner, b + 2.0) / (b + 2.0);
    }
  } else {
    for (double e = 0.0; e < quad.gaussian_radius; e += 0.5) edges.push_back(e);
    edges.push_back(quad.gaussian_radius);
  }
  KahanSum acc;
  acc.add(core);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (edges[i + 1] > edges[i]) acc.add(gauss_panel(rule, edges[i], edges[i + 1], ring));
  }
  const double out = acc.value();
  if (!std::isfinite(out)) throw NonFinite("sup_integrand_integral: non-finite result");
  return out;
}

std::vector<double> default_c_samples() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3}; }

std::vector<std::array<double, 2>> default_x_samples() {
  std::vector<std::array<double, 2>> out{{0.0, 0.0}};
  for (double r : {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 1e2, 1e3}) {
    for (double a : {0.3, 2.0, 4.4}) out.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return out;
}

SupIntegralResult verify_sup_integral_b(double b, std::span<const double> c_samples,
                                        std::span<const std::array<double, 2>> x_samples,
                                        const SupIntegralQuad& quad, Exec ex) {
  quad.validate();
  if (c_samples.empty() || x_samples.empty()) throw std::invalid_argument("verify_sup_integral_b: empty samples");
  const std::size_t nx = x_samples.size();
  SupIntegralResult out{};
  out.values.resize(c_samples.size() * nx);
  for_each_index(out.values.size(), ex, [&](std::size_t i) {
    out.values[i] = sup_integrand_integral(b, c_samples[i / nx], x_samples[i % nx], quad);
  });
  std::size_t arg = 0;
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    if (out.values[i] > out.values[arg]) arg = i;
  }
  out.max = out.values[arg];
  out.argmax_c = c_samples[arg / nx];
  out.argmax_x = x_samples[arg % nx];

  // Inner-cutoff sequence around the singular point.
  double seq_c = out.argmax_c;
  std::array<double, 2> seq_x = out.argmax_x;
  if (std::isinf(out.max) || std::hypot(seq_x[0], seq_x[1]) / seq_c >= quad.far_center) {
    seq_c = 1.0;
    seq_x = {0.0, 0.0};
  }
  for (int j = 1; j <= 12; ++j) out.cutoffs.push_back(std::pow(10.0, -j));
  out.cutoff_values.resize(out.cutoffs.size());
  for_each_index(out.cutoffs.size(), ex, [&](std::size_t j) {
    out.cutoff_values[j] = sup_integrand_integral(b, seq_c, seq_x, quad, out.cutoffs[j]);
  });
  const std::size_t n = out.cutoff_values.size();
  const double last = out.cutoff_values[n - 1] - out.cutoff_values[n - 2];
  const double prev = out.cutoff_values[n - 2] - out.cutoff_values[n - 3];
  out.divergent = last > 0.0 && last >= 0.9 * prev;
  return out;
}

SupIntegralResult verify_sup_integral_b(const ProofIntegralParams& params, std::span<const double> c_samples,
                                        std::span<const std::array<double, 2>> x_samples,
                                        const SupIntegralQuad& quad, Exec ex) {
  return verify_sup_integral_b(params.b, c_samples, x_samples, quad, ex);
}

namespace {

// int_0^1 f on panels refined geometrically toward both ends.
template <class F>
double graded_unit_integral(F&& f) {
  const GaussRule& rule = gauss_legendre(20);
  constexpr int kLevels = 50;
  KahanSum acc;
  double a = 0.0;
  double w = std::ldexp(1.0, -kLevels);
  acc.add(gauss_panel(rule, 0.0, w, f));
  for (int k = 0; k < kLevels - 1; ++k, w *= 2.0) acc.add(gauss_panel(rule, w, 2.0 * w, f));
  a = 0.5;
  w = 0.25;
  for (int k = 0; k < kLevels - 1; ++k, w *= 0.5) {
    acc.add(gauss_panel(rule, a, a + w, f));
    a += w;
  }
  acc.add(gauss_panel(rule, a, 1.0, f));
  return acc.value();
}

}  // namespace

double verify_time_tail_integral(double exponent) {
  const double e = exponent;
  if (!(e > 2.0)) throw std::invalid_argument("verify_time_tail_integral requires exponent > 2 (else divergent)");
  // tau = u^2 on [0, 1]; u = 1/w on [1, inf).
  const double head = graded_unit_integral([&](double u) { return 2.0 * u * std::pow(1.0 + u, -e); });
  double tail;
  if (e >= 3.0) {
    tail = graded_unit_integral([&](double w) { return 2.0 * std::pow(w, e - 3.0) * std::pow(1.0 + w, -e); });
  } else {
    // v = w^{e-2} removes the w^{e-3} singularity.
    const double k = 1.0 / (e - 2.0);
    tail = 2.0 * k * graded_unit_integral([&](double v) { return std::pow(1.0 + std::pow(v, k), -e); });
  }
  const double out = head + tail;
  if (!std::isfinite(out)) throw NonFinite("verify_time_tail_integral: non-finite result");
  return out;
}

double time_tail_closed_form(double exponent) {
  if (!(exponent > 2.0)) throw std::invalid_argument("time_tail_closed_form requires exponent > 2");
  return 2.0 / ((exponent - 1.0) * (exponent - 2.0));
}

}  // namespace wedgeheat
