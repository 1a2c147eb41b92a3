#include "wedgeheat/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "wedgeheat/gauss.hpp"

namespace wedgeheat {

AngularDomain::AngularDomain(double kappa0) : kappa0_(kappa0), critical_exponent_(kPi / kappa0) {
  if (!(kappa0 > 0.0 && kappa0 < 2.0 * kPi)) {
    throw std::invalid_argument("kappa0 must lie in the open interval (0, 2*pi), got " +
                                std::to_string(kappa0));
  }
}

bool in_closed_domain(const AngularDomain& domain, PolarPoint pt) {
  return pt.r >= 0.0 && pt.theta >= 0.0 && pt.theta <= domain.kappa0();
}

std::pair<double, double> polar_to_cart(PolarPoint pt) {
  return {pt.r * std::cos(pt.theta), pt.r * std::sin(pt.theta)};
}

PolarPoint cart_to_polar(double x1, double x2) {
  double theta = std::atan2(x2, x1);
  if (theta < 0.0) theta += 2.0 * kPi;
  return {std::hypot(x1, x2), theta};
}

void GridSpec::validate() const {
  if (!(r_min > 0.0 && r_max > r_min)) {
    throw std::invalid_argument("GridSpec requires 0 < r_min < r_max");
  }
  if (n_radial < 2 || n_angular < 1) {
    throw std::invalid_argument("GridSpec requires n_radial >= 2 and n_angular >= 1");
  }
  if (!(grading_exponent >= 1.0)) {
    throw std::invalid_argument("GridSpec requires grading_exponent >= 1");
  }
  if (points_per_cell < 1) {
    throw std::invalid_argument("GridSpec requires points_per_cell >= 1");
  }
}

GridSpec GridSpec::decades(double r_min, int decades, int cells_per_decade, int n_angular,
                           int points_per_cell) {
  if (decades < 1 || cells_per_decade < 1) {
    throw std::invalid_argument("GridSpec::decades requires decades >= 1 and cells_per_decade >= 1");
  }
  GridSpec g;
  g.r_min = r_min;
  g.r_max = r_min * std::pow(10.0, decades);
  g.n_radial = decades * cells_per_decade;
  g.grading_exponent = 1.0;
  g.n_angular = n_angular;
  g.points_per_cell = points_per_cell;
  g.spacing = RadialSpacing::geometric;
  return g;
}

GridSpec GridSpec::refined() const {
  GridSpec out = *this;
  out.n_radial *= 2;
  out.n_angular *= 2;
  return out;
}

PolarGrid::PolarGrid(const AngularDomain& domain, const GridSpec& spec)
    : domain_(domain), spec_(spec) {
  spec.validate();
  const int n = spec.n_radial;
  const int m = spec.points_per_cell;
  radial_edges_.resize(static_cast<std::size_t>(n) + 1);
  const double span = spec.r_max - spec.r_min;
  const double log_ratio = std::log(spec.r_max / spec.r_min);
  for (int j = 0; j <= n; ++j) {
    const double s = static_cast<double>(j) / n;
    radial_edges_[static_cast<std::size_t>(j)] =
        spec.spacing == RadialSpacing::geometric ? spec.r_min * std::exp(log_ratio * s)
                                                 : spec.r_min + span * std::pow(s, spec.grading_exponent);
  }
  radial_edges_.back() = spec.r_max;

  for (int j = 0; j < n; ++j) {
    append_gauss_panel(radial_edges_[static_cast<std::size_t>(j)],
                       radial_edges_[static_cast<std::size_t>(j) + 1], m, radii_, radial_weights_);
  }
  const double dtheta = domain.kappa0() / spec.n_angular;
  for (int j = 0; j < spec.n_angular; ++j) {
    append_gauss_panel(j * dtheta, (j + 1) * dtheta, m, angles_, angular_weights_);
  }
}

PolarPoint PolarGrid::point(std::size_t k) const {
  const std::size_t nt = angles_.size();
  return {radii_[k / nt], angles_[k % nt]};
}

double PolarGrid::weight(std::size_t k) const {
  const std::size_t nt = angles_.size();
  const std::size_t i = k / nt;
  return radii_[i] * radial_weights_[i] * angular_weights_[k % nt];
}

std::vector<GridNode> PolarGrid::nodes() const {
  std::vector<GridNode> out;
  out.reserve(size());
  for (std::size_t k = 0; k < size(); ++k) out.push_back({point(k), weight(k)});
  return out;
}

std::vector<GridNode> graded_polar_grid(const AngularDomain& domain, const GridSpec& spec) {
  return PolarGrid(domain, spec).nodes();
}

double sector_area(const AngularDomain& domain, const GridSpec& spec) {
  return 0.5 * (spec.r_max * spec.r_max - spec.r_min * spec.r_min) * domain.kappa0();
}

}  // namespace wedgeheat
