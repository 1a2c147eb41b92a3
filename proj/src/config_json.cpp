// JSON form of the experiment configurations. Writers emit every field, so
// a report's embedded config is a complete, replayable input; readers keep
// defaults for absent keys and reject unknown ones.

#include <set>
#include <type_traits>

#include "wedgeheat/experiments.hpp"

namespace wedgeheat {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

// Reads keys out of one JSON object, remembering which were consumed.
class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = convert<T>(j_.at(key), path(key));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  void get(const char* key, std::optional<double>& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const Json& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
    } else {
      out = convert<double>(v, path(key));
    }
  }

  template <class F>
  void nested(const char* key, F&& f) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    Reader r(j_.at(key), path(key));
    f(r);
    r.finish();
  }

  const Json& raw(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  template <class T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          throw ConfigError(where + ": expected a nonnegative integer");
        }
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(where + ": expected an array of numbers");
      }
    }
    return v.get<T>();
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void check_schema(Reader& r, const char* what) {
  if (!r.has("schema_version")) throw ConfigError(std::string(what) + ": missing schema_version");
  int v = 0;
  r.get("schema_version", v);
  if (v != kReportSchemaVersion) {
    throw ConfigError(std::string(what) + ": unsupported schema_version " + std::to_string(v));
  }
}

Json header() { return Json{{"schema_version", kReportSchemaVersion}}; }

Json to_json(const WeightParams& w) { return Json{{"p", w.p}, {"theta", w.theta}}; }

WeightParams weights_from(Reader& r) {
  WeightParams w;
  r.get("p", w.p);
  r.get("theta", w.theta);
  return w;
}

Json to_json(const SeparableMember& m) {
  return Json{{"name", m.name},           {"coefficient", m.coefficient}, {"gamma", opt(m.gamma)},
              {"mode", m.mode},           {"cutoff_r0", m.cutoff_r0},     {"cutoff_r1", m.cutoff_r1},
              {"role", to_string(m.role)}};
}

SeparableMember member_from(Reader& r, SeparableMember m) {
  r.get("name", m.name);
  r.get("coefficient", m.coefficient);
  r.get("gamma", m.gamma);
  r.get("mode", m.mode);
  r.get("cutoff_r0", m.cutoff_r0);
  r.get("cutoff_r1", m.cutoff_r1);
  std::string role = to_string(m.role);
  r.get("role", role);
  m.role = member_role_from_string(role);
  return m;
}

Json to_json(const ExperimentGrid& g) {
  return Json{{"r_min", g.r_min},
              {"r_max", g.r_max},
              {"cells_per_decade", g.cells_per_decade},
              {"n_angular", g.n_angular},
              {"points_per_cell", g.points_per_cell},
              {"time_points", g.time_points}};
}

void grid_from(Reader& r, ExperimentGrid& g) {
  r.get("r_min", g.r_min);
  r.get("r_max", g.r_max);
  r.get("cells_per_decade", g.cells_per_decade);
  r.get("n_angular", g.n_angular);
  r.get("points_per_cell", g.points_per_cell);
  r.get("time_points", g.time_points);
}

Json to_json(const ConvolutionQuad& q) {
  return Json{{"window_sigmas", q.window_sigmas},
              {"rho_panels", q.rho_panels},
              {"rho_points", q.rho_points},
              {"vertex_ratio", q.vertex_ratio},
              {"vertex_panels", q.vertex_panels},
              {"tau",
               {{"n_panels", q.tau.n_panels},
                {"points_per_panel", q.tau.points_per_panel},
                {"refinement_ratio", q.tau.refinement_ratio},
                {"terminal_power", q.tau.terminal_power}}},
              {"tau_floor_factor", q.tau_floor_factor}};
}

void quad_from(Reader& r, ConvolutionQuad& q) {
  r.get("window_sigmas", q.window_sigmas);
  r.get("rho_panels", q.rho_panels);
  r.get("rho_points", q.rho_points);
  r.get("vertex_ratio", q.vertex_ratio);
  r.get("vertex_panels", q.vertex_panels);
  r.nested("tau", [&](Reader& t) {
    t.get("n_panels", q.tau.n_panels);
    t.get("points_per_panel", q.tau.points_per_panel);
    t.get("refinement_ratio", q.tau.refinement_ratio);
    t.get("terminal_power", q.tau.terminal_power);
  });
  r.get("tau_floor_factor", q.tau_floor_factor);
}

Json to_json(const SupIntegralQuad& q) {
  return Json{{"radial_points", q.radial_points},   {"angular_points", q.angular_points},
              {"panel_ratio", q.panel_ratio},       {"inner_radius", q.inner_radius},
              {"gaussian_radius", q.gaussian_radius}, {"far_center", q.far_center}};
}

Json to_json(const GreenBoundOptions& o) {
  return Json{{"sigma_grid", o.sigma_grid},
              {"stability_factor", o.stability_factor},
              {"min_slope", o.min_slope},
              {"profile_fit_max", o.profile_fit_max},
              {"min_decade_count", o.min_decade_count},
              {"q_bins", o.q_bins},
              {"underflow", o.underflow}};
}

template <class T, class F>
std::vector<T> array_of(Reader& r, const char* key, F&& item) {
  const Json& a = r.raw(key);
  if (!a.is_array()) throw ConfigError(r.path(key) + ": expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    Reader e(a[i], r.path(key) + "[" + std::to_string(i) + "]");
    out.push_back(item(e));
    e.finish();
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Json to_json(const SharpnessConfig& c) {
  Json j = header();
  j["kappa0"] = c.kappa0;
  j["p"] = c.p;
  j["theta_grid"] = c.theta_grid;
  j["T"] = c.T;
  j["epsilon"] = c.epsilon;
  j["delta_sequence"] = c.delta_sequence;
  j["cauchy_tol"] = c.cauchy_tol;
  j["slope_tol"] = c.slope_tol;
  j["slope_points"] = c.slope_points;
  return j;
}

SharpnessConfig sharpness_config_from_json(const Json& j) {
  Reader r(j, "sharpness");
  check_schema(r, "sharpness");
  SharpnessConfig c;
  r.get("kappa0", c.kappa0);
  r.get("p", c.p);
  if (!r.has("theta_grid")) c.theta_grid = SharpnessConfig::around(c.kappa0, c.p).theta_grid;
  r.get("theta_grid", c.theta_grid);
  r.get("T", c.T);
  r.get("epsilon", c.epsilon);
  r.get("delta_sequence", c.delta_sequence);
  r.get("cauchy_tol", c.cauchy_tol);
  r.get("slope_tol", c.slope_tol);
  r.get("slope_points", c.slope_points);
  r.finish();
  return c;
}

Json to_json(const RatioScanConfig& c) {
  Json j = header();
  j["kappa0"] = c.kappa0;
  j["params"] = Json::array();
  for (const auto& w : c.params) j["params"].push_back(to_json(w));
  j["family"] = Json::array();
  for (const auto& m : c.family) j["family"].push_back(to_json(m));
  j["T"] = c.T;
  j["deltas"] = c.deltas;
  j["grid"] = to_json(c.grid);
  j["quadrature"] = to_json(c.quad);
  j["cv_max"] = c.cv_max;
  j["growth_min"] = c.growth_min;
  j["t_check"] = opt(c.t_check);
  j["t_check_tol"] = c.t_check_tol;
  return j;
}

RatioScanConfig ratio_config_from_json(const Json& j, bool stochastic) {
  Reader r(j, "ratio");
  check_schema(r, "ratio");
  double kappa0 = RatioScanConfig{}.kappa0;
  r.get("kappa0", kappa0);
  AngularDomain check(kappa0);
  (void)check;
  RatioScanConfig c = stochastic ? RatioScanConfig::stochastic_default(kappa0)
                                 : RatioScanConfig::deterministic_default(kappa0);
  if (r.has("params")) c.params = array_of<WeightParams>(r, "params", [](Reader& e) { return weights_from(e); });
  if (r.has("family")) {
    c.family = array_of<SeparableMember>(r, "family", [](Reader& e) { return member_from(e, SeparableMember{}); });
  }
  r.get("T", c.T);
  r.get("deltas", c.deltas);
  r.nested("grid", [&](Reader& g) { grid_from(g, c.grid); });
  r.nested("quadrature", [&](Reader& q) { quad_from(q, c.quad); });
  r.get("cv_max", c.cv_max);
  r.get("growth_min", c.growth_min);
  r.get("t_check", c.t_check);
  r.get("t_check_tol", c.t_check_tol);
  r.finish();
  return c;
}

Json to_json(const SolutionNormConfig& c) {
  Json j = header();
  j["kappa0"] = c.kappa0;
  j["params"] = to_json(c.params);
  j["source"] = to_json(c.source);
  j["noise"] = to_json(c.noise);
  j["T"] = c.T;
  j["grid"] = to_json(c.grid);
  j["quadrature"] = to_json(c.quad);
  j["refinements"] = c.refinements;
  j["refinement_tol"] = c.refinement_tol;
  return j;
}

SolutionNormConfig solution_norm_config_from_json(const Json& j) {
  Reader r(j, "solution_norm");
  check_schema(r, "solution_norm");
  SolutionNormConfig c;
  r.get("kappa0", c.kappa0);
  r.nested("params", [&](Reader& e) { c.params = weights_from(e); });
  r.nested("source", [&](Reader& e) { c.source = member_from(e, c.source); });
  r.nested("noise", [&](Reader& e) { c.noise = member_from(e, c.noise); });
  r.get("T", c.T);
  r.nested("grid", [&](Reader& g) { grid_from(g, c.grid); });
  r.nested("quadrature", [&](Reader& q) { quad_from(q, c.quad); });
  r.get("refinements", c.refinements);
  r.get("refinement_tol", c.refinement_tol);
  r.finish();
  return c;
}

Json to_json(const KernelSuiteConfig& c) {
  Json j = header();
  j["suite"] = to_string(c.suite);
  j["kappa0s"] = c.kappa0s;
  j["n"] = c.n;
  j["seed"] = c.seed;
  j["tol"] = c.tol;
  return j;
}

KernelSuiteConfig kernel_suite_config_from_json(const Json& j) {
  Reader r(j, "kernel_suite");
  check_schema(r, "kernel_suite");
  std::string suite = "images";
  r.get("suite", suite);
  KernelSuiteConfig c = KernelSuiteConfig::defaults(kernel_suite_from_string(suite));
  r.get("kappa0s", c.kappa0s);
  r.get("n", c.n);
  r.get("seed", c.seed);
  r.get("tol", c.tol);
  r.finish();
  return c;
}

Json to_json(const GreenBoundConfig& c) {
  Json j = header();
  j["kappa0"] = c.kappa0;
  j["lambda"] = c.lambda;
  j["seed"] = c.seed;
  j["n_general"] = c.n_general;
  j["n_configs"] = c.n_configs;
  j["options"] = to_json(c.options);
  j["slope_tol"] = c.slope_tol;
  j["growth_min"] = c.growth_min;
  return j;
}

GreenBoundConfig green_bound_config_from_json(const Json& j) {
  Reader r(j, "green_bound");
  check_schema(r, "green_bound");
  GreenBoundConfig c;
  r.get("kappa0", c.kappa0);
  r.get("lambda", c.lambda);
  r.get("seed", c.seed);
  r.get("n_general", c.n_general);
  r.get("n_configs", c.n_configs);
  r.nested("options", [&](Reader& o) {
    auto& op = c.options;
    o.get("sigma_grid", op.sigma_grid);
    o.get("stability_factor", op.stability_factor);
    o.get("min_slope", op.min_slope);
    o.get("profile_fit_max", op.profile_fit_max);
    o.get("min_decade_count", op.min_decade_count);
    if (o.has("q_bins")) {
      std::vector<double> bins;
      o.get("q_bins", bins);
      if (bins.size() != op.q_bins.size()) throw ConfigError(o.path("q_bins") + ": expected three values");
      std::copy(bins.begin(), bins.end(), op.q_bins.begin());
    }
    o.get("underflow", op.underflow);
  });
  r.get("slope_tol", c.slope_tol);
  r.get("growth_min", c.growth_min);
  r.finish();
  return c;
}

Json to_json(const ProofIntegralsConfig& c) {
  Json j = header();
  j["b"] = opt(c.b);
  j["exponent"] = opt(c.exponent);
  j["p"] = opt(c.p);
  j["theta"] = opt(c.theta);
  j["kappa0"] = opt(c.kappa0);
  j["quad"] = to_json(c.quad);
  j["refinement_tol"] = c.refinement_tol;
  j["closed_form_tol"] = c.closed_form_tol;
  return j;
}

ProofIntegralsConfig proof_integrals_config_from_json(const Json& j) {
  Reader r(j, "proof_integrals");
  check_schema(r, "proof_integrals");
  ProofIntegralsConfig c;
  r.get("b", c.b);
  r.get("exponent", c.exponent);
  r.get("p", c.p);
  r.get("theta", c.theta);
  r.get("kappa0", c.kappa0);
  r.nested("quad", [&](Reader& q) {
    q.get("radial_points", c.quad.radial_points);
    q.get("angular_points", c.quad.angular_points);
    q.get("panel_ratio", c.quad.panel_ratio);
    q.get("inner_radius", c.quad.inner_radius);
    q.get("gaussian_radius", c.quad.gaussian_radius);
    q.get("far_center", c.quad.far_center);
  });
  r.get("refinement_tol", c.refinement_tol);
  r.get("closed_form_tol", c.closed_form_tol);
  r.finish();
  return c;
}

Json to_json(const MonteCarloConfig& c) {
  Json j = header();
  j["kappa0"] = c.kappa0;
  j["noise"] = Json::array();
  for (const auto& m : c.noise) j["noise"].push_back(to_json(m));
  j["t"] = c.t;
  j["probes"] = Json::array();
  for (const auto& x : c.probes) j["probes"].push_back({{"r", x.r}, {"theta", x.theta}});
  j["p"] = c.p;
  j["n_paths"] = c.n_paths;
  j["seed"] = c.seed;
  j["se_max"] = c.se_max;
  j["variance_tol"] = c.variance_tol;
  j["quadrature"] = to_json(c.quad);
  return j;
}

MonteCarloConfig monte_carlo_config_from_json(const Json& j) {
  Reader r(j, "monte_carlo");
  check_schema(r, "monte_carlo");
  double kappa0 = MonteCarloConfig{}.kappa0;
  r.get("kappa0", kappa0);
  MonteCarloConfig c = MonteCarloConfig::defaults(kappa0);
  if (r.has("noise")) {
    c.noise = array_of<SeparableMember>(r, "noise", [](Reader& e) { return member_from(e, SeparableMember{}); });
  }
  r.get("t", c.t);
  if (r.has("probes")) {
    c.probes = array_of<PolarPoint>(r, "probes", [](Reader& e) {
      PolarPoint x;
      e.get("r", x.r);
      e.get("theta", x.theta);
      return x;
    });
  }
  r.get("p", c.p);
  r.get("n_paths", c.n_paths);
  r.get("seed", c.seed);
  r.get("se_max", c.se_max);
  r.get("variance_tol", c.variance_tol);
  r.nested("quadrature", [&](Reader& q) { quad_from(q, c.quad); });
  r.finish();
  return c;
}

}  // namespace wedgeheat
