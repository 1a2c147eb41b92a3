#pragma once

#include <limits>
#include <vector>

namespace wedgeheat {

/// chi(r) = 1 for r <= r0, 0 for r >= r1, joined by the septic smootherstep
/// (three continuous derivatives). r0 == r1 gives the hard indicator of
/// r < r1; r1 = infinity means no cutoff at all.
struct SmoothCutoff {
  double r0 = std::numeric_limits<double>::infinity();
  double r1 = std::numeric_limits<double>::infinity();

  static SmoothCutoff none() { return {}; }
  static SmoothCutoff hard(double r) { return {r, r}; }
  static SmoothCutoff smooth(double r0, double r1) { return {r0, r1}; }

  void validate() const;
  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
};

/// Radial factor F(r) of a separable field F(r) sin(m pi theta / kappa0).
class RadialProfile {
 public:
  enum class Kind { power_cutoff, power_cutoff_laplacian, tabulated };

  /// c r^gamma chi(r).
  static RadialProfile power_cutoff(double c, double gamma, SmoothCutoff cut);
  /// Radial factor of Laplacian(c r^gamma chi(r) sin(order theta)):
  ///   F'' + F'/r - order^2 F / r^2.
  static RadialProfile power_cutoff_laplacian(double c, double gamma, SmoothCutoff cut, double order);
  /// Piecewise-linear interpolation of (r_i, v_i), zero outside [r_0, r_n].
  static RadialProfile tabulated(std::vector<double> r, std::vector<double> v);

  Kind kind() const { return kind_; }
  double operator()(double r) const;
  /// dF/dr (one-sided slopes at table nodes for tabulated profiles).
  double derivative(double r) const;
  /// F vanishes for r >= support_end() (infinity when unbounded).
  double support_end() const;
  /// Points where F is less smooth; quadratures put panel edges there.
  std::vector<double> breakpoints() const;

  double coefficient() const { return c_; }
  double exponent() const { return gamma_; }
  const SmoothCutoff& cutoff() const { return cut_; }

 private:
  RadialProfile() = default;

  Kind kind_ = Kind::power_cutoff;
  double c_ = 0.0;
  double gamma_ = 0.0;
  double order_ = 0.0;
  SmoothCutoff cut_{};
  std::vector<double> r_;
  std::vector<double> v_;
};

}  // namespace wedgeheat
