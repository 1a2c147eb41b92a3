#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wedgeheat/kernel.hpp"
#include "wedgeheat/parallel.hpp"

namespace wedgeheat {

// ---------------------------------------------------------------------------
// Sample clouds

/// Random (t, x, y) triples, t and radii log-uniform, angles uniform in
/// [margin, 1 - margin] * kappa0. Draws with q = |x - y|^2 / 4t > max_q or
/// Bessel argument r rho / 2t > max_bessel_arg are rejected (the series
/// loses relative accuracy like 1e-16 e^q) and counted.
struct CloudSpec {
  std::size_t n = 200;
  double t_min = 1e-3;
  double t_max = 10.0;
  double r_min = 1e-3;
  double r_max = 10.0;
  double angle_margin = 0.01;
  double max_q = 9.0;
  double max_bessel_arg = 400.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Triples approaching the vertex. n_configs base configurations
/// (u in [1, 10) log-uniform, both angles, |y| / sqrt(t) log-uniform in
/// [partner_min, partner_max]) are replicated in every decade
/// s = |x| / sqrt(t) = 10^k u, k = decade_min .. decade_max - 1, so that
/// per-decade maxima compare identical scaled configurations (the kernel is
/// dilation invariant). Each replica draws its own t, log-uniform in the
/// part of [t_min, t_max] that keeps both radii inside [r_min, r_max].
struct VertexCloudSpec {
  std::size_t n_configs = 400;
  int decade_min = -6;
  int decade_max = 0;
  double t_min = 1e-4;
  double t_max = 1e2;
  double r_min = 1e-6;
  double r_max = 1e2;
  double partner_min = 0.3;
  double partner_max = 3.0;
  double angle_margin = 0.01;
  double max_q = 9.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct KernelCloud {
  std::vector<KernelSample> samples;
  std::size_t rejected = 0;
};

KernelCloud sample_kernel_cloud(const AngularDomain& domain, const CloudSpec& spec);
/// Samples are stored configuration-major: replica k of configuration c at
/// c * n_decades + k. Configurations failing the q filter in any decade are
/// dropped as a whole and counted in `rejected`.
KernelCloud sample_vertex_cloud(const AngularDomain& domain, const VertexCloudSpec& spec);

/// Cloud for fit_green_bound: a general cloud over the full (t, r) ranges
/// for the sup, and a vertex lattice for the decade profile.
struct GreenBoundCloud {
  KernelCloud general;
  KernelCloud vertex;
};

GreenBoundCloud sample_green_bound_cloud(const AngularDomain& domain, std::uint64_t seed,
                                         std::size_t n_general = 2000, std::size_t n_configs = 400);

// ---------------------------------------------------------------------------
// Kernel identities

/// Polar quadrature for int_D G(t, x, z) G(s, z, y) dz. The radial window is
/// the overlap of |rho - |x|| <= window_sigmas sqrt(t) and
/// |rho - |y|| <= window_sigmas sqrt(s) (graded toward the vertex when it
/// reaches it); the angular range is the whole opening.
struct CkQuad {
  double window_sigmas = 10.0;
  int n_radial = 40;
  int n_angular = 64;
  int points_per_cell = 4;

  void validate() const;
  CkQuad refined() const;
};

struct CkResult {
  double lhs;        ///< int_D G(t, x, z) G(s, z, y) dz
  double rhs;        ///< G(t + s, x, y)
  double residual;   ///< |lhs - rhs| / rhs, 0 when underflowed
  bool underflow;    ///< both sides below 1e-300
};

CkResult check_chapman_kolmogorov(const KernelConfig& cfg, double t, double s, PolarPoint x, PolarPoint y,
                                  const CkQuad& quad = {}, Exec ex = default_exec());

/// |a^2 G(a^2 t, a x, a y) - G(t, x, y)| / G(t, x, y); 0 when G is 0.
double check_dilation(const KernelConfig& cfg, double a, double t, PolarPoint x, PolarPoint y);

// ---------------------------------------------------------------------------
// Kozlov bound |G| <= (N/t) e^{-sigma |x-y|^2/t} R_{x,t}^lambda R_{y,t}^lambda,
// R_{x,t} = |x| / (|x| + |y| + sqrt t).

struct DecadeRatio {
  double r_scale;    ///< lower edge of the decade of min(|x|, |y|) / sqrt(t)
  double max_ratio;
  std::size_t count;
};

struct SigmaTrial {
  double sigma;
  double sup_ratio;
  bool stable;
};

struct GreenBoundFit {
  double lambda;
  double sigma;        ///< largest stable sigma, or the smallest tried if none
  double sup_ratio;    ///< at sigma
  std::size_t sample_size;
  std::size_t excluded;  ///< numerator and denominator both below 1e-250
  bool bounded;
  /// Per-decade maxima over the vertex lattice at sigma, smallest decade
  /// first; only decades with at least min_decade_count samples.
  std::vector<DecadeRatio> profile;
  /// Least-squares slope of log10(max_ratio) against the decade centre, over
  /// decades lying below profile_fit_max. Toward the vertex the ratio
  /// behaves like (|x|/sqrt t)^{pi/kappa0 - lambda}.
  double profile_slope;
  std::vector<SigmaTrial> trials;

  /// profile[0].max_ratio / profile[k].max_ratio.
  double decade_growth(std::size_t k) const;
};

/// "Bounded" is decade stability, the computable surrogate for a sup over
/// the continuum: for a given sigma the two smallest decades differ by less
/// than stability_factor, the profile slope is at least min_slope (no growth
/// toward the vertex), and the largest-q bin does not exceed the next by
/// stability_factor (no growth in |x - y|^2/t). Scanning sigma upward, the
/// first sigma whose sup exceeds the previous one by stability_factor, and
/// every larger sigma, count as unstable.
struct GreenBoundOptions {
  std::vector<double> sigma_grid{0.05, 0.10, 0.15, 0.20, 0.25};
  double stability_factor = 2.0;
  double min_slope = -0.02;
  double profile_fit_max = 1e-3;
  std::size_t min_decade_count = 20;
  std::array<double, 3> q_bins{3.0, 6.0, 9.0};  ///< upper edges
  double underflow = 1e-250;

  void validate() const;
};

/// sup_ratio and the q-bin test use both clouds; the decade profile uses the
/// vertex lattice only.
GreenBoundFit fit_green_bound(const KernelConfig& cfg, double lambda, const GreenBoundCloud& cloud,
                              const GreenBoundOptions& opt = {}, Exec ex = default_exec());

struct VertexDecay {
  double slope;
  double intercept;
  bool underflow;  ///< some G < 1e-250 (those points are dropped)
  std::vector<double> values;
};

/// Least-squares slope of log G(t, (r, kappa0/2), y0) against log r.
/// Requires at least 3 samples.
VertexDecay vertex_decay_exponent(const KernelConfig& cfg, double t, PolarPoint y0,
                                  std::span<const double> r_samples);

// ---------------------------------------------------------------------------
// Integrals from the proof of the main estimate

/// Exponents of the proof for given (p, theta) on an opening angle kappa0:
///   mu = 1 + (theta - 2)/p,  lambda = pi/kappa0 - epsilon,
///   0 < alpha < mu + lambda - 2/p',  0 < beta < -mu + lambda + 2/p'
/// (alpha and beta at the midpoints), b = alpha p - 2 and the time-tail
/// exponent beta p + 2. epsilon defaults to half the slack of
/// |mu - 2/p'| < pi/kappa0.
struct ProofIntegralParams {
  double p;
  double theta;
  double kappa0;
  double mu;
  double p_dual;
  double lambda;
  double alpha;
  double beta;
  double b;
  /// -b when b is in (-2, 0): the exponent of the equivalent integral
  /// e^{-|z - x|^2} (|x| + |z| + 1)^{b'} / |z|^{b'}; empty for b >= 0.
  std::optional<double> beta_prime;

  /// Throws std::invalid_argument if p < 2, theta is outside the admissible
  /// range, or epsilon is not in (0, slack); std::logic_error if the
  /// constructed exponents fail the inequalities (checked by evaluation).
  static ProofIntegralParams from_weights(double p, double theta, double kappa0,
                                          std::optional<double> epsilon = std::nullopt);

  double time_tail_exponent() const { return beta * p + 2.0; }
  bool satisfies_conditions() const;
};

struct SupIntegralQuad {
  int radial_points = 12;
  int angular_points = 128;
  double panel_ratio = 0.5;      ///< geometric panels toward the singular point
  double inner_radius = 1e-8;    ///< below it the singular part is integrated analytically
  double gaussian_radius = 8.0;  ///< the Gaussian is negligible beyond it
  double far_center = 12.0;      ///< singular point ignored when |x/c| exceeds it

  void validate() const;
  SupIntegralQuad refined() const;
};

/// int_{R^2} e^{-|z|^2} (|x - cz| / (|x| + |x - cz| + c))^b dz for one
/// (c, x), x Cartesian. Polar coordinates centred at the singular point
/// x/c when |x/c| < far_center, else at the origin. With cutoff > 0 the
/// disc |z - x/c| < cutoff is left out (and no analytic core is added).
/// Returns +infinity for b <= -2 without a cutoff when the singular point
/// is in range.
double sup_integrand_integral(double b, double c, std::array<double, 2> x, const SupIntegralQuad& quad = {},
                              double cutoff = 0.0);

struct SupIntegralResult {
  double max;                       ///< +infinity when divergent
  double argmax_c;
  std::array<double, 2> argmax_x;
  std::vector<double> values;       ///< per (c, x), c-major
  /// Inner-cutoff sequence at the argmax (or at c = 1, x = 0 when b <= -2).
  std::vector<double> cutoffs;
  std::vector<double> cutoff_values;
  bool divergent;                   ///< cutoff increments do not shrink
};

SupIntegralResult verify_sup_integral_b(double b, std::span<const double> c_samples,
                                        std::span<const std::array<double, 2>> x_samples,
                                        const SupIntegralQuad& quad = {}, Exec ex = default_exec());
SupIntegralResult verify_sup_integral_b(const ProofIntegralParams& params, std::span<const double> c_samples,
                                        std::span<const std::array<double, 2>> x_samples,
                                        const SupIntegralQuad& quad = {}, Exec ex = default_exec());

/// Default (c, x) sample grid: c over seven decades, x on rays at several
/// angles with |x| from 0 to 1e3.
std::vector<double> default_c_samples();
std::vector<std::array<double, 2>> default_x_samples();

/// int_0^inf (1 + sqrt(tau))^{-e} dtau by quadrature (e > 2).
double verify_time_tail_integral(double exponent);
/// The closed form 2 / ((e - 1)(e - 2)).
double time_tail_closed_form(double exponent);

}  // namespace wedgeheat
