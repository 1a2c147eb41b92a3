#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wedgeheat/fields.hpp"
#include "wedgeheat/geometry.hpp"
#include "wedgeheat/kernel.hpp"
#include "wedgeheat/parallel.hpp"
#include "wedgeheat/profiles.hpp"
#include "wedgeheat/quadrature.hpp"

namespace wedgeheat {

// ---------------------------------------------------------------------------
// Inputs

/// Piecewise-constant amplitude: amplitudes[i] on [s_i, s_{i+1}) with
/// s_0 = 0 and s_{n+1} = infinity, n = switch_times.size().
struct TimeSchedule {
  std::vector<double> switch_times;
  std::vector<double> amplitudes{1.0};

  static TimeSchedule constant(double a = 1.0) { return {{}, {a}}; }
  void validate() const;
  double operator()(double s) const;
};

/// One angular mode F(r) sin(m pi theta / kappa0), m >= 1.
struct AngularMode {
  int m;
  RadialProfile radial;
};

/// Spatial field on the wedge as a finite sum of angular modes. Tabulated
/// data are projected onto the leading modes, so every field is handled by
/// the same mode-wise heat-semigroup machinery.
class SpatialField {
 public:
  static SpatialField zero() { return SpatialField({}); }
  static SpatialField separable(int m, RadialProfile radial);
  explicit SpatialField(std::vector<AngularMode> modes);

  /// Sine coefficients of values sampled on `grid` (one per node, flat
  /// index), taken row by row with the grid's angular rule and stored as
  /// piecewise-linear radial tables. Exact for fields that are sums of the
  /// first n_modes sines, up to radial interpolation.
  static SpatialField tabulated(const PolarGrid& grid, std::span<const double> values, int n_modes);

  std::span<const AngularMode> modes() const { return modes_; }
  bool is_zero() const { return modes_.empty(); }
  double operator()(double kappa0, PolarPoint x) const;

 private:
  std::vector<AngularMode> modes_;
};

/// f(t, x) = sum_j a_j(t) f_j(x).
struct SourceTerm {
  SpatialField field;
  TimeSchedule schedule;
};
struct SourceSpec {
  std::vector<SourceTerm> terms;

  void validate() const;
  double operator()(double kappa0, double t, PolarPoint x) const;
  std::vector<double> switch_times() const;
};

/// g = sum_k a_k(t) g^k(x) e_k: finitely many l2 coordinates with
/// deterministic piecewise-constant amplitudes.
struct NoiseMode {
  int index;
  SpatialField field;
  TimeSchedule schedule;
};
struct NoiseSpec {
  std::vector<NoiseMode> modes;

  /// Indices must be distinct; schedules valid.
  void validate() const;
  /// |g(t, x)|_{l2}.
  double l2_norm(double kappa0, double t, PolarPoint x) const;
  std::vector<double> switch_times() const;
};

// ---------------------------------------------------------------------------
// Quadrature controls

struct ConvolutionQuad {
  /// Radial window |rho - r| <= window_sigmas * sqrt(tau) of the mode integral.
  double window_sigmas = 13.0;
  int rho_panels = 10;  ///< panels across a full window
  int rho_points = 8;
  /// Geometric panels toward rho = 0 when the window reaches the vertex.
  double vertex_ratio = 0.25;
  int vertex_panels = 12;
  /// Lag grids refine geometrically toward tau = 0 until the innermost
  /// panel is below tau_floor_factor * r^2 (r the evaluation radius).
  TimeQuadSpec tau{24, 8, 0.25, 4};
  double tau_floor_factor = 1e-3;

  void validate() const;
  ConvolutionQuad refined() const;  ///< doubles every resolution parameter
};

/// Panels on [0, t_end] with edges at `breaks`, refined geometrically
/// (ratio spec.refinement_ratio) toward 0 and, when refine_after_breaks,
/// toward every break from the right, down to panels of width `finest`.
/// The innermost panel of each refinement uses the graded map.
PanelGrid refined_time_grid(double t_end, double finest, std::span<const double> breaks,
                            const TimeQuadSpec& spec, bool refine_after_breaks);

// ---------------------------------------------------------------------------
// Heat semigroup on angular modes

/// (e^{tau Laplacian} applied to F(rho) sin(nu phi)) at (r, theta) equals
/// sin(nu theta) times
///   Hrad(tau, r) = (1/(2 tau)) int_0^inf e^{-(r-rho)^2/4tau} I~_nu(r rho/2tau) F(rho) rho d rho,
/// nu = m pi / kappa0 (orthogonality of the angular sines). Evaluated with
/// Gauss panels on the Gaussian window around rho = r, split at the
/// profile's breakpoints and graded toward rho = 0.
double mode_radial_transform(const KernelConfig& cfg, int m, const RadialProfile& F, double tau, double r,
                             const ConvolutionQuad& quad = {});

/// (e^{tau Laplacian} g)(x).
double semigroup_apply(const KernelConfig& cfg, const SpatialField& g, double tau, PolarPoint x,
                       const ConvolutionQuad& quad = {});

/// Same integral by brute-force 2D quadrature of G(tau, x, y) g(y) over a
/// polar window around x, with the full kernel; an independent cross-check
/// of the mode route. panels_per_sigma panels of `points` Gauss points per
/// sqrt(tau) in each direction.
double semigroup_apply_2d(const KernelConfig& cfg, const SpatialField& g, double tau, PolarPoint x,
                          int panels_per_sigma = 1, int points = 6, double window_sigmas = 8.0,
                          Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Deterministic convolution

/// v(t, x) = int_0^t int_D G(t - s, x, y) f(s, y) dy ds.
double det_convolve(const KernelConfig& cfg, const SourceSpec& src, double t, PolarPoint x,
                    const ConvolutionQuad& quad = {});

/// Values of a space-time field at (times[l], grid.point(k)), stored at
/// l * grid.size() + k.
struct SpaceTimeField {
  std::vector<double> times;
  PolarGrid grid;
  std::vector<double> values;

  double at(std::size_t l, std::size_t k) const { return values[l * grid.size() + k]; }
};

/// v on all (time, node) pairs.
SpaceTimeField det_field(const KernelConfig& cfg, const SourceSpec& src, std::span<const double> times,
                         const PolarGrid& grid, const ConvolutionQuad& quad = {}, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Stochastic convolution through its variance

/// Var w(t, x) = sum_k int_0^t a_k(s)^2 (e^{(t-s) Laplacian} g^k)(x)^2 ds
/// on all (time, node) pairs.
using VarianceField = SpaceTimeField;

VarianceField variance_field(const KernelConfig& cfg, const NoiseSpec& noise, std::span<const double> times,
                             const PolarGrid& grid, const ConvolutionQuad& quad = {}, Exec ex = default_exec());

/// Var w(t, x) at one point.
double variance_at(const KernelConfig& cfg, const NoiseSpec& noise, double t, PolarPoint x,
                   const ConvolutionQuad& quad = {});

/// Weighted space-time integral sum_l tw_l sum_k integrand(l, k) r_k^{e} cell_k
/// broken down by radial grid row, so that cutoffs {r > delta} at cell
/// edges are partial sums.
struct RadialRows {
  std::vector<double> radii;
  std::vector<double> rows;

  double total() const;
  /// Sum over rows with radius > delta.
  double above(double delta) const;
};

/// Rows of E int int ||x|^{-1} w|^p |x|^{theta-2} dx dt
///   = E|Z|^p sum_l tw_l sum_k Var^{p/2} r^{theta-2-p} cell_k.
/// Requires p >= 2.
RadialRows lhs_rows(const VarianceField& var, const WeightParams& w, std::span<const double> time_weights,
                    Exec ex = default_exec());
double lhs_weighted_moment(const VarianceField& var, const WeightParams& w, std::span<const double> time_weights,
                           Exec ex = default_exec());

/// Rows of int int |g|_{l2}^p |x|^{theta-2} dx dt on (times, grid).
RadialRows rhs_g_rows(const NoiseSpec& noise, const WeightParams& w, const PolarGrid& grid,
                      std::span<const double> times, std::span<const double> time_weights,
                      Exec ex = default_exec());
double rhs_g_norm(const NoiseSpec& noise, const WeightParams& w, const PolarGrid& grid,
                  std::span<const double> times, std::span<const double> time_weights,
                  Exec ex = default_exec());

/// Rows of int int ||x|^{-1} v|^p |x|^{theta-2} dx dt.
RadialRows det_lhs_rows(const SpaceTimeField& v, const WeightParams& w, std::span<const double> time_weights,
                        Exec ex = default_exec());
/// Rows of int int ||x| f|^p |x|^{theta-2} dx dt.
RadialRows det_rhs_rows(const SourceSpec& src, const WeightParams& w, const PolarGrid& grid,
                        std::span<const double> times, std::span<const double> time_weights,
                        Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Monte Carlo

struct McProbe {
  double abs_moment;     ///< empirical E|w|^p
  double abs_moment_se;  ///< its standard error
  double variance;       ///< empirical E w^2
  double variance_se;
  double kurtosis;       ///< E w^4 / (E w^2)^2
  double kurtosis_se;    ///< sqrt(24 / n), the Gaussian-theory standard error
  double quad_variance;  ///< variance of the discretised integral (exact in law)
};

struct McResult {
  std::vector<McProbe> probes;
  std::size_t n_paths;
};

/// Samples w(t, x) = sum_k int_0^t a_k(s) h_k(t - s, x) dW^k_s at the
/// probe points, sharing the Brownian paths across probes. The stochastic
/// integral is discretised on the lag grid of the smallest probe radius:
/// w = sum_k sum_l a_k(t - tau_l) h_k(tau_l, x) sqrt(omega_l) xi_{k,l},
/// xi iid standard normal from a counter-based SplitMix64 stream keyed by
/// (seed, path), so results depend only on the seed, never on scheduling.
McResult mc_sample_w(const KernelConfig& cfg, const NoiseSpec& noise, double t, std::span<const PolarPoint> probes,
                     std::size_t n_paths, std::uint64_t seed, double p, const ConvolutionQuad& quad = {},
                     Exec ex = default_exec());

/// SplitMix64 keyed stream with Box-Muller normals.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next_u64();
  double next_normal();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// The vertex counterexample u = r^{pi/kappa0} sin(pi theta/kappa0) beta_t

struct CounterexampleSpec {
  double kappa0;  ///< raw opening angle in (0, 2 pi]
  double T = 1.0;
  double p = 2.0;
  double theta = 2.0;
  double epsilon = 1.0;
  std::vector<double> delta_sequence;

  void validate() const;
  /// (pi/kappa0 - 1) p + theta.
  double q() const;
};

/// E|Z|^p * int_0^T t^{p/2} dt * int_0^kappa0 |sin(pi th/kappa0)|^p dth,
/// the time and angle factors by graded Gauss quadrature.
double counterexample_constant(const CounterexampleSpec& spec);

/// C * int_delta^epsilon r^{q-1} dr (radial factor in closed form).
double counterexample_integral(const CounterexampleSpec& spec, double delta);
/// log of the same, usable where the value would overflow.
double counterexample_log_integral(const CounterexampleSpec& spec, double delta);

}  // namespace wedgeheat
