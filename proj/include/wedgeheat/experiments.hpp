#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wedgeheat/convolution.hpp"
#include "wedgeheat/verify.hpp"

namespace wedgeheat {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.4.0";
inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Reports

/// A table cell. Non-finite doubles are legal (written as null / "nan").
using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  Table(std::string name_, std::vector<std::string> columns_)
      : name(std::move(name_)), columns(std::move(columns_)) {}

  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws std::logic_error if the row width does not match the header.
  void add_row(std::vector<Cell> row);
};

struct Verdict {
  std::string name;
  bool pass;
  std::string detail;
};

/// Everything an experiment produced. `config` is the complete input: running
/// the same experiment from it reproduces every table bit for bit. The first
/// table is the primary one (the `.csv` next to the JSON).
struct ExperimentReport {
  std::string kind;
  Json config;
  std::vector<Table> tables;
  Json summary = Json::object();
  std::vector<Verdict> verdicts;
  std::string tool_version = kToolVersion;
  std::optional<std::string> timestamp;  ///< set by the writer, see report.hpp

  bool all_pass() const;
  const Table& table(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Sharpness of the vertex weight threshold

struct SharpnessConfig {
  double kappa0 = 2 * kPi;  ///< raw angle in (0, 2 pi]
  double p = 2.0;
  std::vector<double> theta_grid{0.5, 0.9, 1.0, 1.1, 1.5};
  double T = 1.0;
  double epsilon = 1.0;
  /// 1e-1, 1e-2, ..., 1e-60: log divergence (q = 0) only separates from a
  /// 1 % Cauchy test after ~50 decades.
  std::vector<double> delta_sequence = decade_sequence(-1, -60);
  double cauchy_tol = 0.01;   ///< convergent: last relative change below this
  double slope_tol = 0.05;    ///< divergent: fitted slope within this of -q
  int slope_points = 3;       ///< the slope is fitted over the last points

  void validate() const;
  /// theta grid threshold + {-0.5, -0.1, 0, 0.1, 0.5} (the defaults above
  /// are this grid for kappa0 = 2 pi, p = 2).
  static SharpnessConfig around(double kappa0, double p);
  static std::vector<double> decade_sequence(int first, int last);
};

/// For each theta and delta, I(delta) = counterexample_integral. Each theta
/// is classified convergent (|I_n - I_{n-1}| <= cauchy_tol I_n at the last
/// step), divergent (nondecreasing as delta shrinks and the slope of
/// log I against log(1/delta) within slope_tol of -q) or inconclusive. The
/// verdicts: every theta classified, the classes separated on the grid, the
/// threshold p (1 - pi/kappa0) in [largest divergent, smallest convergent),
/// and every divergent slope matching.
ExperimentReport sharpness_scan(const SharpnessConfig& cfg, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Estimate-ratio scans

/// Which checks a family member takes part in. Stability (CV across delta)
/// needs the member resolved by every grid cutoff; growth below the
/// threshold is best seen with a member concentrated at the cutoff scale.
enum class MemberRole { stability, growth, both };

/// c r^gamma chi(r) sin(m pi theta / kappa0), chi the smooth cutoff between
/// cutoff_r0 and cutoff_r1; gamma defaults to pi/kappa0 (the harmonic
/// vertex profile).
struct SeparableMember {
  explicit SeparableMember(std::string name_ = {}) : name(std::move(name_)) {}

  std::string name;
  double coefficient = 1.0;
  std::optional<double> gamma;
  int mode = 1;
  double cutoff_r0 = 0.25;
  double cutoff_r1 = 0.5;
  MemberRole role = MemberRole::both;

  void validate() const;
  SpatialField field(double kappa0) const;
};

/// Geometric polar grid for the ratio and norm experiments: whole decades
/// from r_min to r_max, so cutoffs at decades are grid-cell edges.
struct ExperimentGrid {
  double r_min = 1e-4;
  double r_max = 10.0;
  int cells_per_decade = 8;
  int n_angular = 4;
  int points_per_cell = 4;
  int time_points = 8;  ///< Gauss-Legendre nodes in t on [0, T]

  void validate() const;
  GridSpec spec() const;
  ExperimentGrid refined() const;  ///< doubles cells, angles and time points
};

struct RatioScanConfig {
  double kappa0 = 3 * kPi / 2;
  std::vector<WeightParams> params;
  std::vector<SeparableMember> family;
  double T = 1.0;
  std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  ExperimentGrid grid;
  ConvolutionQuad quad;
  double cv_max = 0.10;
  double growth_min = 10.0;
  /// Second horizon for the T-independence spot check (stochastic scan).
  std::optional<double> t_check;
  double t_check_tol = 0.25;

  void validate() const;
  /// p = 2, theta in {2 (interior), lower bound - 0.2}; a resolved member
  /// (cutoff 0.25..0.5, stability) and a vertex-concentrated one (cutoff
  /// 0.01..0.02, growth); the stochastic default adds the T = 4 check.
  static RatioScanConfig stochastic_default(double kappa0);
  static RatioScanConfig deterministic_default(double kappa0);
};

/// ratio(delta) = E int int ||x|^{-1} w|^p |x|^{theta-2} / E int int |g|^p |x|^{theta-2}
/// over {|x| > delta}, per (p, theta) and member. Verdicts: CV <= cv_max for
/// admissible theta and stability members; ratio(min delta) /
/// ratio(max delta) >= growth_min for theta at or below the lower bound
/// and growth members; with t_check, the admissible ratio at T' within
/// t_check_tol of the one at T. Zero members give 0/0, reported as NaN with
/// the `degenerate` flag and excluded from verdicts.
ExperimentReport main_estimate_ratio_scan(const RatioScanConfig& cfg, Exec ex = default_exec());

/// Same protocol for int int ||x|^{-1} v|^p |x|^{theta-2} / int int ||x| f|^p |x|^{theta-2}.
ExperimentReport det_estimate_ratio_scan(const RatioScanConfig& cfg, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Solution norm

struct SolutionNormConfig {
  double kappa0 = 3 * kPi / 2;
  WeightParams params{2.0, 2.0};
  SeparableMember source{"f"};
  SeparableMember noise{"g"};
  double T = 1.0;
  ExperimentGrid grid;
  ConvolutionQuad quad;
  int refinements = 1;
  double refinement_tol = 0.15;

  void validate() const;
};

/// u = v + w. Left side: (int_0^T ||v(t)||^p_{K^1_{p,theta-p}} dt)^{1/p}
/// (finite-difference gradient) plus (E int int |w|^p |x|^{theta-p-2})^{1/p}
/// (zeroth order only). Right side ||f||_{L_{p,theta+p}} + ||g||_{L_{p,theta}}.
/// Verdicts: ratio finite, and stable within refinement_tol under each
/// refinement of grid and quadrature.
ExperimentReport solution_norm_check(const SolutionNormConfig& cfg, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Monte Carlo moments of the stochastic convolution

struct MonteCarloConfig {
  double kappa0 = 3 * kPi / 2;
  /// Member i drives the l2 coordinate e_{i+1} with constant amplitude.
  std::vector<SeparableMember> noise;
  double t = 0.5;
  std::vector<PolarPoint> probes;
  double p = 2.0;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 1;
  double se_max = 3.0;
  /// Discretised-sum variance against the mode-route variance (exact law).
  double variance_tol = 1e-6;
  ConvolutionQuad quad;

  void validate() const;
  /// Two members (modes 1 and 2, cutoffs 0.25..0.5 and 0.3..0.6), probes
  /// (0.1, kappa0/2) and (0.3, kappa0/3).
  static MonteCarloConfig defaults(double kappa0);
};

/// Empirical E|w(t, x)|^p against the Gaussian moment
/// E|Z|^p Var w(t, x)^{p/2}, Var w from variance_at. Verdicts: every probe
/// within se_max standard errors; the discretised variance within
/// variance_tol of Var w. Results do not depend on the Exec.
ExperimentReport mc_moment_check(const MonteCarloConfig& cfg, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Verification reports

enum class KernelSuite { symmetry, scaling, ck, images, mass, decay };

struct KernelSuiteConfig {
  KernelSuite suite = KernelSuite::images;
  std::vector<double> kappa0s;
  std::size_t n = 200;
  std::uint64_t seed = 1;
  double tol = 1e-8;

  void validate() const;
  /// Defaults per suite:
  ///   images    kappa0 in {pi, pi/2}, 200 points, 1e-8
  ///   symmetry  kappa0 in {pi/2, pi, 3pi/2}, 200 points, 1e-12
  ///   scaling   same, a in {1/16, 1/2, 2, 16} (exact in binary); a in
  ///             {0.1, 0.7, 3} reported only
  ///   ck        kappa0 = 3pi/2, 20 triples, 1e-4
  ///   mass      half-plane erf(1/2) within 1e-6, and a cloud in [0, 1 + 1e-6]
  ///   decay     kappa0 in {pi/2, pi, 3pi/2}, slope within 0.02 of pi/kappa0
  static KernelSuiteConfig defaults(KernelSuite suite);
};

ExperimentReport kernel_suite_report(const KernelSuiteConfig& cfg, Exec ex = default_exec());

struct GreenBoundConfig {
  double kappa0 = kPi;
  double lambda = 0.9;
  std::uint64_t seed = 1;
  std::size_t n_general = 2000;
  std::size_t n_configs = 400;
  GreenBoundOptions options;
  double slope_tol = 0.02;
  double growth_min = 5.0;  ///< smallest decade over the one two decades up, for lambda > pi/kappa0

  void validate() const;
};

/// Kozlov-bound fit. Verdicts: the bounded/unbounded classification agrees
/// with lambda < pi/kappa0; the vertex profile slope is within slope_tol of
/// pi/kappa0 - lambda; above the threshold, two-decade growth >= growth_min.
/// Tables: `profile` (primary), `sigma_trials`.
ExperimentReport green_bound_report(const GreenBoundConfig& cfg, Exec ex = default_exec());

struct ProofIntegralsConfig {
  std::optional<double> b;
  std::optional<double> exponent;  ///< time-tail exponent beta p + 2
  /// Alternatively derive both from weights.
  std::optional<double> p;
  std::optional<double> theta;
  std::optional<double> kappa0;
  SupIntegralQuad quad;
  double refinement_tol = 1e-6;
  double closed_form_tol = 1e-10;

  void validate() const;
};

/// Sup integral over the default (c, x) samples (bounded and stable under
/// quad.refined() for b > -2, divergence detected for b <= -2) and the
/// time-tail integral against its closed form.
ExperimentReport proof_integrals_report(const ProofIntegralsConfig& cfg, Exec ex = default_exec());

// ---------------------------------------------------------------------------
// Configuration files (JSON). Parsers reject unknown keys and wrong types
// with ConfigError; absent keys keep their defaults.

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json to_json(const SharpnessConfig& cfg);
Json to_json(const RatioScanConfig& cfg);
Json to_json(const SolutionNormConfig& cfg);
Json to_json(const KernelSuiteConfig& cfg);
Json to_json(const GreenBoundConfig& cfg);
Json to_json(const ProofIntegralsConfig& cfg);
Json to_json(const MonteCarloConfig& cfg);

/// kappa0 and p are read first; an absent theta_grid is centred on their
/// threshold.
SharpnessConfig sharpness_config_from_json(const Json& j);
/// kappa0 is read first; the defaults of the remaining keys depend on it
/// and on `stochastic`.
RatioScanConfig ratio_config_from_json(const Json& j, bool stochastic);
SolutionNormConfig solution_norm_config_from_json(const Json& j);
KernelSuiteConfig kernel_suite_config_from_json(const Json& j);
GreenBoundConfig green_bound_config_from_json(const Json& j);
ProofIntegralsConfig proof_integrals_config_from_json(const Json& j);
/// kappa0 is read first; absent noise and probes take defaults(kappa0).
MonteCarloConfig monte_carlo_config_from_json(const Json& j);

std::string to_string(KernelSuite s);
KernelSuite kernel_suite_from_string(const std::string& s);
std::string to_string(MemberRole r);
MemberRole member_role_from_string(const std::string& s);

}  // namespace wedgeheat
