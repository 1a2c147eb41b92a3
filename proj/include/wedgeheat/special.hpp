#pragma once

namespace wedgeheat {

/// Accuracy controls for the exponentially scaled modified Bessel function.
struct BesselAccuracy {
  double rel_tol = 1e-14;
  /// Power series below max(series_switch_z, nu^2 / 2), large-argument
  /// expansion above it (orders below debye_min_order only).
  double series_switch_z = 30.0;
  int max_terms = 1000;
  /// Orders at or above this use the uniform (Debye) expansion.
  double debye_min_order = 15.0;

  void validate() const;
};

/// e^{-z} I_nu(z) for nu >= 0, z >= 0.
///
/// Regimes: uniform asymptotic expansion for nu >= debye_min_order; for
/// lower orders the ascending series (summed outward from its largest term,
/// so nothing overflows) when z <= max(series_switch_z, nu^2/2), and the
/// Hankel large-argument expansion otherwise. Throws NonConvergent when the
/// chosen regime cannot meet rel_tol within max_terms, std::invalid_argument
/// for negative inputs.
double bessel_i_scaled(double nu, double z, const BesselAccuracy& acc = {});

/// log Gamma(x) for x > 0 (Lanczos, g = 7, nine coefficients).
double gamma_ln(double x);

/// E|Z|^p for a standard normal Z, p >= 1.
double gaussian_abs_moment(double p);

}  // namespace wedgeheat
