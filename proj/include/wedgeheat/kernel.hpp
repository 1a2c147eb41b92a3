#pragma once

#include <span>
#include <vector>

#include "wedgeheat/geometry.hpp"
#include "wedgeheat/parallel.hpp"
#include "wedgeheat/special.hpp"

namespace wedgeheat {

/// Controls for the separated series of the wedge Dirichlet heat kernel.
struct KernelConfig {
  AngularDomain domain;
  double series_rel_tol = 1e-14;
  int max_series_terms = 400;
  BesselAccuracy bessel_acc{};

  explicit KernelConfig(AngularDomain d) : domain(d) {}
  /// Throws std::invalid_argument unless series_rel_tol is in [1e-14, 1e-6]
  /// and max_series_terms >= 20.
  void validate() const;
};

/// G(t, x, y) for the Dirichlet heat equation u_t = Laplacian u on the wedge,
/// normalised so that int G(t, x, y) dy <= 1:
///
///   G = (1 / (kappa0 t)) e^{-(r - rho)^2 / 4t}
///       * sum_k I~_{k pi/kappa0}(r rho / 2t) sin(k pi th / kappa0) sin(k pi ph / kappa0)
///
/// with I~ the exponentially scaled Bessel function. Terms are added until
/// three consecutive Bessel magnitudes fall below series_rel_tol times the
/// partial sum (I~ decreases in the order, so later terms are smaller
/// still). Exactly 0 on the boundary rays and at the vertex.
///
/// When r rho / t is large and the angles are far apart the series cancels
/// to e^{-r rho (1 - cos(th - ph)) / 2t} of its terms; the result is then
/// limited by rounding in the sum rather than by the truncation tolerance.
///
/// Throws NonConvergent after max_series_terms terms, std::invalid_argument
/// for t <= 0 or points outside the closed wedge.
double heat_kernel(const KernelConfig& cfg, double t, PolarPoint x, PolarPoint y);

/// Number of series terms heat_kernel used for (t, x, y); 0 when it
/// short-circuits. For diagnostics and benchmarks.
int heat_kernel_terms(const KernelConfig& cfg, double t, PolarPoint x, PolarPoint y);

/// Method-of-images kernel, available for kappa0 = pi (one reflection) and
/// kappa0 = pi/2 (three reflections). Evaluated in the factored forms
///   pi:    K(x - y) (1 - e^{-x2 y2 / t})
///   pi/2:  K(x - y) (1 - e^{-x1 y1 / t}) (1 - e^{-x2 y2 / t})
/// with K(z) = e^{-|z|^2 / 4t} / (4 pi t), which avoid the cancellation of
/// the signed image sum. Throws std::invalid_argument for other angles.
double image_kernel_oracle(double kappa0, double t, PolarPoint x, PolarPoint y);

/// int_D G(t, x, y) dy on the polar grid `quad`.
double kernel_mass(const KernelConfig& cfg, double t, PolarPoint x, const GridSpec& quad,
                   Exec ex = default_exec());

struct KernelSample {
  double t;
  PolarPoint x;
  PolarPoint y;
};

/// heat_kernel over a sample cloud; element i of the result belongs to
/// samples[i] regardless of the execution policy.
std::vector<double> kernel_cloud(const KernelConfig& cfg, std::span<const KernelSample> samples,
                                 Exec ex = default_exec());

}  // namespace wedgeheat
