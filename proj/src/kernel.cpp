#include "wedgeheat/kernel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wedgeheat/errors.hpp"
#include "wedgeheat/quadrature.hpp"

namespace wedgeheat {

void KernelConfig::validate() const {
  if (!(series_rel_tol >= 1e-14 && series_rel_tol <= 1e-6)) {
    throw std::invalid_argument("KernelConfig.series_rel_tol must lie in [1e-14, 1e-6]");
  }
  if (max_series_terms < 20) throw std::invalid_argument("KernelConfig.max_series_terms must be >= 20");
  bessel_acc.validate();
}

namespace {

void check_point(const AngularDomain& d, PolarPoint p, const char* name) {
  if (!in_closed_domain(d, p)) {
    throw std::invalid_argument(std::string("heat_kernel: ") + name + " outside the closed wedge");
  }
}

bool on_boundary(const AngularDomain& d, PolarPoint p) {
  return p.r == 0.0 || p.theta == 0.0 || p.theta == d.kappa0();
}

struct SeriesResult {
  double value;
  int terms;
};

SeriesResult kernel_series(const KernelConfig& cfg, double t, PolarPoint x, PolarPoint y) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_kernel requires t > 0");
  check_point(cfg.domain, x, "x");
  check_point(cfg.domain, y, "y");
  if (on_boundary(cfg.domain, x) || on_boundary(cfg.domain, y)) return {0.0, 0};

  const double kappa0 = cfg.domain.kappa0();
  const double nu1 = cfg.domain.critical_exponent();
  const double dr = x.r - y.r;
  const double prefactor = std::exp(-dr * dr / (4.0 * t)) / (kappa0 * t);
  if (prefactor == 0.0) return {0.0, 0};
  const double z = x.r * y.r / (2.0 * t);

  KahanSum sum;
  int quiet = 0;
  for (int k = 1; k <= cfg.max_series_terms; ++k) {
    const double nu = k * nu1;
    const double b = bessel_i_scaled(nu, z, cfg.bessel_acc);
    if (b == 0.0) return {prefactor * sum.value(), k};  // every later order underflows too
    sum.add(b * std::sin(nu * x.theta) * std::sin(nu * y.theta));
    quiet = b < cfg.series_rel_tol * std::fabs(sum.value()) ? quiet + 1 : 0;
    if (quiet == 3) return {prefactor * sum.value(), k};
  }
  throw NonConvergent("heat_kernel: series did not converge within " + std::to_string(cfg.max_series_terms) +
                      " terms (t=" + std::to_string(t) + ", r*rho/2t=" + std::to_string(z) + ")");
}

}  // namespace

double heat_kernel(const KernelConfig& cfg, double t, PolarPoint x, PolarPoint y) {
  return kernel_series(cfg, t, x, y).value;
}

int heat_kernel_terms(const KernelConfig& cfg, double t, PolarPoint x, PolarPoint y) {
  return kernel_series(cfg, t, x, y).terms;
}

double image_kernel_oracle(double kappa0, double t, PolarPoint x, PolarPoint y) {
  if (!(t > 0.0)) throw std::invalid_argument("image_kernel_oracle requires t > 0");
  const bool half_plane = std::fabs(kappa0 - kPi) < 1e-12;
  const bool quadrant = std::fabs(kappa0 - kPi / 2) < 1e-12;
  if (!half_plane && !quadrant) {
    throw std::invalid_argument("image_kernel_oracle supports kappa0 = pi or pi/2 only");
  }
  const auto [x1, x2] = polar_to_cart(x);
  const auto [y1, y2] = polar_to_cart(y);
  const double d2 = (x1 - y1) * (x1 - y1) + (x2 - y2) * (x2 - y2);
  const double free = std::exp(-d2 / (4.0 * t)) / (4.0 * kPi * t);
  // On a boundary ray the cosine/sine of the exact angle is not exactly 0.
  const double a2 = (x.theta == 0.0 || y.theta == 0.0) ? 0.0 : x2 * y2;
  const double factor2 = -std::expm1(-a2 / t);
  if (half_plane) return free * factor2;
  const bool edge = x.theta == kappa0 || y.theta == kappa0;
  const double a1 = edge ? 0.0 : x1 * y1;
  return free * factor2 * -std::expm1(-a1 / t);
}

double kernel_mass(const KernelConfig& cfg, double t, PolarPoint x, const GridSpec& quad, Exec ex) {
  cfg.validate();
  const PolarGrid grid(cfg.domain, quad);
  return integrate_polar_weighted(grid, [&](PolarPoint y) { return heat_kernel(cfg, t, x, y); }, 0.0, ex);
}

std::vector<double> kernel_cloud(const KernelConfig& cfg, std::span<const KernelSample> samples, Exec ex) {
  cfg.validate();
  std::vector<double> out(samples.size());
  for_each_index(samples.size(), ex, [&](std::size_t i) {
    out[i] = heat_kernel(cfg, samples[i].t, samples[i].x, samples[i].y);
  });
  return out;
}

}  // namespace wedgeheat
