#include "wedgeheat/fields.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wedgeheat/quadrature.hpp"

namespace wedgeheat {

namespace {

void require_p(double p) {
  if (!(p > 1.0)) throw std::invalid_argument("weight parameter p must exceed 1, got " + std::to_string(p));
}

double checked_angle(double kappa0) {
  if (!(kappa0 > 0.0 && kappa0 <= 2.0 * kPi)) {
    throw std::invalid_argument("kappa0 must lie in (0, 2*pi], got " + std::to_string(kappa0));
  }
  return kappa0;
}

}  // namespace

DerivedParams derive(const WeightParams& w) {
  require_p(w.p);
  const double p_dual = w.p / (w.p - 1.0);
  return {1.0 + (w.theta - 2.0) / w.p, p_dual, p_dual * (2.0 - w.theta / w.p)};
}

WeightParams dual(const WeightParams& w) {
  const DerivedParams d = derive(w);
  return {d.p_dual, d.theta_dual};
}

Interval theta_admissible_range(double p, double kappa0) {
  require_p(p);
  const double e = kPi / checked_angle(kappa0);
  return {p * (1.0 - e), p * (1.0 + e)};
}

Interval theta_admissible_range(double p, const AngularDomain& domain) {
  return theta_admissible_range(p, domain.kappa0());
}

Interval mu_range(double p, double kappa0) {
  require_p(p);
  const double e = kPi / checked_angle(kappa0);
  const double c = 2.0 * (1.0 - 1.0 / p);
  return {c - e, c + e};
}

Interval mu_range(double p, const AngularDomain& domain) { return mu_range(p, domain.kappa0()); }

double grisvard_lower_bound(double p, double kappa0) {
  require_p(p);
  return p * (1.0 - kPi / checked_angle(kappa0));
}

double grisvard_lower_bound(double p, const AngularDomain& domain) {
  return grisvard_lower_bound(p, domain.kappa0());
}

bool grisvard_forms_agree(double p, double kappa0, double theta) {
  require_p(p);
  const double e = kPi / checked_angle(kappa0);
  const bool sobolev_form = 1.0 + (2.0 - theta) / p < 2.0 / p + e;
  const bool weight_form = theta > p * (1.0 - e);
  return sobolev_form == weight_form;
}

Interval c1_theta_range(double p) {
  require_p(p);
  return {1.0, 1.0 + p};
}

double weighted_lp_integral(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
                            Exec ex) {
  require_p(w.p);
  std::vector<double> powered(values.size());
  for_each_index(values.size(), ex, [&](std::size_t k) { powered[k] = std::pow(std::fabs(values[k]), w.p); });
  return integrate_polar_weighted(grid, std::span<const double>(powered), w.theta - 2.0, ex);
}

double weighted_lp_norm(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
                        Exec ex) {
  return std::pow(weighted_lp_integral(grid, values, w, ex), 1.0 / w.p);
}

namespace {

// Weights of the derivative at `at` of the quadratic through (x0, x1, x2).
std::array<double, 3> lagrange_d1(double x0, double x1, double x2, double at) {
  return {((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2)),
          ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2)),
          ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1))};
}

// Derivative along a line of n >= 3 samples with coordinates xs, values
// fetched through get(i).
template <class Get>
double line_derivative(std::span<const double> xs, std::size_t i, Get&& get) {
  const std::size_t n = xs.size();
  const std::size_t c = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
  const auto w = lagrange_d1(xs[c - 1], xs[c], xs[c + 1], xs[i]);
  return w[0] * get(c - 1) + w[1] * get(c) + w[2] * get(c + 1);
}

}  // namespace

CartesianGradient fd_gradient(const PolarGrid& grid, std::span<const double> values, Exec ex) {
  if (values.size() != grid.size()) throw std::invalid_argument("fd_gradient: size mismatch");
  if (grid.n_r() < 3 || grid.n_theta() < 3) {
    throw std::invalid_argument("fd_gradient needs at least 3 radial and 3 angular nodes");
  }
  const auto radii = grid.radii();
  const auto angles = grid.angles();
  const std::size_t nt = grid.n_theta();
  CartesianGradient g{std::vector<double>(values.size()), std::vector<double>(values.size())};
  for_each_index(grid.n_r(), ex, [&](std::size_t i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double fr = line_derivative(radii, i, [&](std::size_t a) { return values[a * nt + j]; });
      const double ft = line_derivative(angles, j, [&](std::size_t b) { return values[i * nt + b]; });
      const double c = std::cos(angles[j]);
      const double s = std::sin(angles[j]);
      const double ft_r = ft / radii[i];
      g.dx1[i * nt + j] = c * fr - s * ft_r;
      g.dx2[i * nt + j] = s * fr + c * ft_r;
    }
  });
  return g;
}

double k1_norm(const PolarGrid& grid, std::span<const double> values, const CartesianGradient& grad,
               const WeightParams& w, GradientNorm convention, Exec ex) {
  if (grad.dx1.size() != grid.size() || grad.dx2.size() != grid.size() || values.size() != grid.size()) {
    throw std::invalid_argument("k1_norm: size mismatch");
  }
  const double base = weighted_lp_norm(grid, values, w, ex);
  const std::size_t nt = grid.n_theta();
  const auto radii = grid.radii();
  if (convention == GradientNorm::euclidean) {
    std::vector<double> mag(grid.size());
    for_each_index(grid.size(), ex,
                   [&](std::size_t k) { mag[k] = radii[k / nt] * std::hypot(grad.dx1[k], grad.dx2[k]); });
    return base + weighted_lp_norm(grid, mag, w, ex);
  }
  std::vector<double> c1(grid.size());
  std::vector<double> c2(grid.size());
  for_each_index(grid.size(), ex, [&](std::size_t k) {
    c1[k] = radii[k / nt] * grad.dx1[k];
    c2[k] = radii[k / nt] * grad.dx2[k];
  });
  return base + weighted_lp_norm(grid, c1, w, ex) + weighted_lp_norm(grid, c2, w, ex);
}

double k1_norm(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
               GradientNorm convention, Exec ex) {
  return k1_norm(grid, values, fd_gradient(grid, values, ex), w, convention, ex);
}

}  // namespace wedgeheat
