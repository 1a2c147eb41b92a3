#pragma once

#include <span>
#include <vector>

#include "wedgeheat/geometry.hpp"
#include "wedgeheat/parallel.hpp"

namespace wedgeheat {

/// Open interval (lo, hi).
struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return lo < x && x < hi; }
};

/// Integrability exponent p and vertex-weight exponent theta of the spaces
/// L_{p,theta} = L_p(D, |x|^{theta-2} dx).
struct WeightParams {
  double p = 2.0;
  double theta = 2.0;
};

/// mu = 1 + (theta - 2)/p, and the dual pair (p', theta') with
/// 1/p + 1/p' = 1 and theta/p + theta'/p' = 2.
struct DerivedParams {
  double mu;
  double p_dual;
  double theta_dual;
};

/// Throws std::invalid_argument for p <= 1.
DerivedParams derive(const WeightParams& w);
/// (p', theta'); applying it twice returns (p, theta) up to rounding.
WeightParams dual(const WeightParams& w);

// The parameter arithmetic takes either a domain or a raw opening angle in
// (0, 2 pi]; the closed end admits the slit plane kappa0 = 2 pi used by the
// threshold examples, which has no AngularDomain.

/// (p (1 - pi/kappa0), p (1 + pi/kappa0)).
Interval theta_admissible_range(double p, const AngularDomain& domain);
Interval theta_admissible_range(double p, double kappa0);

/// (2 (1 - 1/p) - pi/kappa0, 2 (1 - 1/p) + pi/kappa0): the image of the
/// admissible theta range under theta -> mu.
Interval mu_range(double p, const AngularDomain& domain);
Interval mu_range(double p, double kappa0);

/// p (1 - pi/kappa0), i.e. the theta at which 1 + (2 - theta)/p = 2/p + pi/kappa0.
double grisvard_lower_bound(double p, const AngularDomain& domain);
double grisvard_lower_bound(double p, double kappa0);

/// Evaluates both sides of 1 + (2 - theta)/p < 2/p + pi/kappa0 and of
/// theta > p (1 - pi/kappa0) and reports whether the two forms agree.
/// At the boundary itself rounding may split them, so callers should
/// keep theta away from grisvard_lower_bound by a few ulps.
bool grisvard_forms_agree(double p, double kappa0, double theta);

/// Weight range d - 1 < theta < d + p - 1 for C^1 domains in dimension d = 2.
Interval c1_theta_range(double p);

/// int_D |f|^p |x|^{theta-2} dx over the grid (no p-th root).
double weighted_lp_integral(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
                            Exec ex = default_exec());
/// (int_D |f|^p |x|^{theta-2} dx)^{1/p}.
double weighted_lp_norm(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
                        Exec ex = default_exec());

/// Cartesian gradient components at the grid nodes, flat-indexed like the grid.
struct CartesianGradient {
  std::vector<double> dx1;
  std::vector<double> dx2;
};

/// Gradient from polar finite differences: three-point Lagrange
/// derivatives in r and theta along grid lines (one-sided at the ends,
/// second order on smooth nonuniform spacing), then
///   f_x1 = cos(theta) f_r - sin(theta) f_theta / r,
///   f_x2 = sin(theta) f_r + cos(theta) f_theta / r.
/// The grid needs at least three nodes in each direction.
CartesianGradient fd_gradient(const PolarGrid& grid, std::span<const double> values, Exec ex = default_exec());

enum class GradientNorm {
  component_sum,  ///< ||r f_x1|| + ||r f_x2||
  euclidean       ///< || r |grad f| ||
};

/// ||f|| + gradient part, both in L_{p,theta}: the first-order norm in which
/// each derivative carries one extra power of |x|.
double k1_norm(const PolarGrid& grid, std::span<const double> values, const CartesianGradient& grad,
               const WeightParams& w, GradientNorm convention = GradientNorm::component_sum,
               Exec ex = default_exec());
/// Same with the gradient from fd_gradient.
double k1_norm(const PolarGrid& grid, std::span<const double> values, const WeightParams& w,
               GradientNorm convention = GradientNorm::component_sum, Exec ex = default_exec());

}  // namespace wedgeheat
