#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wedgeheat {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// The open sector {r > 0, 0 < theta < kappa0} with vertex at the origin.
class AngularDomain {
 public:
  /// Throws std::invalid_argument unless 0 < kappa0 < 2*pi.
  explicit AngularDomain(double kappa0);

  double kappa0() const { return kappa0_; }
  /// pi / kappa0: the vanishing rate of the heat kernel at the vertex.
  double critical_exponent() const { return critical_exponent_; }

 private:
  double kappa0_;
  double critical_exponent_;
};

struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
};

/// True when r >= 0 and 0 <= theta <= kappa0.
bool in_closed_domain(const AngularDomain& domain, PolarPoint pt);

std::pair<double, double> polar_to_cart(PolarPoint pt);
PolarPoint cart_to_polar(double x1, double x2);

inline double dist_to_vertex(PolarPoint pt) { return pt.r; }

enum class RadialSpacing {
  power,     ///< r_j = r_min + (r_max - r_min) * (j / n_radial)^grading_exponent
  geometric  ///< r_j = r_min * (r_max / r_min)^(j / n_radial)
};

/// Parameters of a graded tensor-product polar grid.
///
/// Radial cell edges follow the chosen RadialSpacing (power rule by default);
/// the angular range (0, kappa0) is cut into n_angular uniform panels.
/// With points_per_cell == 1 each cell carries one node at its midpoint;
/// larger values place a points_per_cell x points_per_cell Gauss-Legendre
/// rule in every cell. Nodes never lie on the vertex or on the boundary rays.
struct GridSpec {
  double r_min = 1e-6;
  double r_max = 1.0;
  int n_radial = 256;
  double grading_exponent = 3.0;
  int n_angular = 64;
  int points_per_cell = 1;
  RadialSpacing spacing = RadialSpacing::power;

  /// Geometric grid on [r_min, r_min * 10^decades] with a whole number of
  /// cells per decade, so every r_min * 10^k is a cell edge.
  static GridSpec decades(double r_min, int decades, int cells_per_decade, int n_angular,
                          int points_per_cell);

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
  GridSpec refined() const;  ///< doubles n_radial and n_angular
};

struct GridNode {
  PolarPoint point;
  double weight;  ///< polar cell-area weight r * dr * dtheta
};

/// Tensor-product polar quadrature grid. Node (i, j) pairs radial node i
/// with angular node j and is stored at flat index i * n_theta() + j.
class PolarGrid {
 public:
  PolarGrid(const AngularDomain& domain, const GridSpec& spec);

  const AngularDomain& domain() const { return domain_; }
  const GridSpec& spec() const { return spec_; }

  std::size_t n_r() const { return radii_.size(); }
  std::size_t n_theta() const { return angles_.size(); }
  std::size_t size() const { return radii_.size() * angles_.size(); }

  std::span<const double> radii() const { return radii_; }
  std::span<const double> radial_weights() const { return radial_weights_; }
  std::span<const double> angles() const { return angles_; }
  std::span<const double> angular_weights() const { return angular_weights_; }
  /// Radial cell edges (n_radial + 1 values).
  std::span<const double> radial_edges() const { return radial_edges_; }

  std::size_t index(std::size_t i, std::size_t j) const { return i * angles_.size() + j; }
  PolarPoint point(std::size_t k) const;
  double weight(std::size_t k) const;

  std::vector<GridNode> nodes() const;

 private:
  AngularDomain domain_;
  GridSpec spec_;
  std::vector<double> radial_edges_;
  std::vector<double> radii_;
  std::vector<double> radial_weights_;  // dr part only
  std::vector<double> angles_;
  std::vector<double> angular_weights_;
};

/// Builds the grid and returns its nodes with polar cell-area weights.
std::vector<GridNode> graded_polar_grid(const AngularDomain& domain, const GridSpec& spec);

/// Exact area of the annular sector covered by the grid.
double sector_area(const AngularDomain& domain, const GridSpec& spec);

}  // namespace wedgeheat
