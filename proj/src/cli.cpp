#include "wedgeheat/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wedgeheat/errors.hpp"
#include "wedgeheat/experiments.hpp"
#include "wedgeheat/kernel.hpp"
#include "wedgeheat/report.hpp"

namespace wedgeheat {

namespace {

// Thrown for bad flag combinations that CLI11 cannot express.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json{{"schema_version", kReportSchemaVersion}};
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Flags override file keys: a set flag replaces the key before parsing, so
// the parsers' key-dependent defaults see the final value.
template <class T>
void overlay(Json& j, const std::string& key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

int jobs_from_env() {
  const char* env = std::getenv("WEDGEHEAT_JOBS");
  if (!env || !*env) return 0;
  int n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc{} || ptr != end || n < 0) throw UsageError("WEDGEHEAT_JOBS must be a non-negative integer");
  return n;
}

std::string fmt_value(double v) {
  std::ostringstream os;
  os << std::setprecision(11) << v;
  return os.str();
}

struct Shared {
  std::string out_dir = "reports";
  std::optional<int> jobs;
  bool timestamp = false;
  bool no_write = false;
  bool verbose = false;
  bool print_config = false;
};

int finish(ExperimentReport rep, const Shared& sh, std::ostream& out) {
  std::string where;
  if (!sh.no_write) {
    const auto w = write_report(rep, {sh.out_dir, sh.timestamp});
    where = " -> " + w.json.string();
  }
  std::size_t passed = 0;
  std::string failed;
  for (const auto& v : rep.verdicts) {
    if (v.pass) {
      ++passed;
    } else {
      failed += (failed.empty() ? "" : ", ") + v.name;
    }
  }
  const bool ok = rep.all_pass();
  out << (ok ? "PASS " : "FAIL ") << rep.kind << " (" << passed << "/" << rep.verdicts.size() << " verdicts"
      << (ok ? "" : "; failed: " + failed) << ")" << where << "\n";
  if (sh.verbose || !ok) {
    for (const auto& v : rep.verdicts) out << "  " << (v.pass ? "pass " : "FAIL ") << v.name << ": " << v.detail << "\n";
  }
  return ok ? kExitPass : kExitVerdict;
}

// Either prints the resolved configuration or runs the experiment on it.
template <class Cfg, class Run>
int run_or_print(const Cfg& cfg, Run&& run, const Shared& sh, std::ostream& out) {
  if (sh.print_config) {
    out << to_json(cfg).dump(2) << "\n";
    return kExitPass;
  }
  return finish(run(cfg), sh, out);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dirichlet heat kernel on a plane wedge: kernel checks and weighted-estimate experiments", "wedgeheat"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Shared sh;
  app.add_option("--out", sh.out_dir, "Report directory");
  app.add_option("--jobs", sh.jobs, "Worker threads; 1 = serial reference, 0 = OpenMP default "
                                    "(default: $WEDGEHEAT_JOBS, else 0)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--timestamp", sh.timestamp,
               "Stamp reports with the wall clock (SOURCE_DATE_EPOCH, when set, always wins; otherwise null)");
  app.add_flag("--no-write", sh.no_write, "Print the verdict without writing report files");
  app.add_flag("-v,--verbose", sh.verbose, "Print every verdict's detail line");
  app.add_flag("--print-config", sh.print_config,
               "Print the resolved configuration (file + flags + defaults) as JSON and exit");

  std::function<int()> action;

  // kernel eval -------------------------------------------------------------
  auto* kernel = app.add_subcommand("kernel", "Evaluate the heat kernel")->require_subcommand(1);
  auto* eval = kernel->add_subcommand("eval", "Print G(t, x, y)");
  struct {
    double kappa0, t, xr, xt, yr, yt;
  } ke{};
  eval->add_option("--kappa0", ke.kappa0, "Opening angle in (0, 2 pi)")->required();
  eval->add_option("--t", ke.t, "Time > 0")->required();
  eval->add_option("--x-r", ke.xr, "|x|")->required();
  eval->add_option("--x-theta", ke.xt, "Angle of x in [0, kappa0]")->required();
  eval->add_option("--y-r", ke.yr, "|y|")->required();
  eval->add_option("--y-theta", ke.yt, "Angle of y in [0, kappa0]")->required();
  eval->callback([&] {
    action = [&] {
      const KernelConfig cfg{AngularDomain(ke.kappa0)};
      out << fmt_value(heat_kernel(cfg, ke.t, {ke.xr, ke.xt}, {ke.yr, ke.yt})) << "\n";
      return int{kExitPass};
    };
  });

  // verify ------------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "Kernel, bound, integral and Monte Carlo checks")->require_subcommand(1);

  std::string config_path;
  std::optional<double> kappa0;

  auto* vk = verify->add_subcommand("kernel", "Kernel identity suites");
  std::optional<std::string> suite;
  std::optional<std::vector<double>> kappa0s;
  std::optional<std::size_t> vk_n;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  vk->add_option("--config", config_path, "JSON config (schema_version 1)");
  vk->add_option("--suite", suite, "symmetry|scaling|ck|images|mass|decay (default: images)")
      ->check(CLI::IsMember({"symmetry", "scaling", "ck", "images", "mass", "decay"}));
  vk->add_option("--kappa0", kappa0s, "Opening angles, repeatable (default: per suite)");
  vk->add_option("--n", vk_n, "Cloud size (default: per suite)");
  vk->add_option("--seed", seed, "Cloud seed (default: 1)");
  vk->add_option("--tol", tol, "Relative tolerance (default: per suite)");
  vk->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "suite", suite);
      overlay(j, "kappa0s", kappa0s);
      overlay(j, "n", vk_n);
      overlay(j, "seed", seed);
      overlay(j, "tol", tol);
      return run_or_print(kernel_suite_config_from_json(j), [](const auto& c) { return kernel_suite_report(c); }, sh, out);
    };
  });

  auto* vb = verify->add_subcommand("bound", "Fit the Kozlov bound for one lambda");
  std::optional<double> lambda, lambda_factor;
  std::optional<std::size_t> n_general, n_configs;
  vb->add_option("--config", config_path, "JSON config (schema_version 1)");
  vb->add_option("--kappa0", kappa0, "Opening angle (default: pi)");
  auto* lam = vb->add_option("--lambda", lambda, "Vertex exponent lambda (default: 0.9)");
  vb->add_option("--lambda-factor", lambda_factor, "Set lambda = factor * pi / kappa0")->excludes(lam);
  vb->add_option("--seed", seed, "Cloud seed (default: 1)");
  vb->add_option("--n-general", n_general, "General cloud size (default: 2000)");
  vb->add_option("--n-configs", n_configs, "Vertex lattice configurations (default: 400)");
  vb->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "kappa0", kappa0);
      if (lambda_factor) {
        const double k0 = j.contains("kappa0") ? j["kappa0"].get<double>() : GreenBoundConfig{}.kappa0;
        j["lambda"] = *lambda_factor * kPi / k0;
      }
      overlay(j, "lambda", lambda);
      overlay(j, "seed", seed);
      overlay(j, "n_general", n_general);
      overlay(j, "n_configs", n_configs);
      return run_or_print(green_bound_config_from_json(j), [](const auto& c) { return green_bound_report(c); }, sh, out);
    };
  });

  auto* vp = verify->add_subcommand("proof-integrals", "Sup integral in b and the time-tail integral");
  std::optional<double> b, exponent, p, theta;
  vp->add_option("--config", config_path, "JSON config (schema_version 1)");
  vp->add_option("--b", b, "Exponent b of the sup integral (default: none)");
  vp->add_option("--exponent", exponent, "Time-tail exponent, > 2 (default: none)");
  vp->add_option("--p", p, "Derive b and the exponent from weights (with --theta, --kappa0)");
  vp->add_option("--theta", theta, "Weight theta (with --p)");
  vp->add_option("--kappa0", kappa0, "Opening angle (with --p)");
  vp->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "b", b);
      overlay(j, "exponent", exponent);
      overlay(j, "p", p);
      overlay(j, "theta", theta);
      overlay(j, "kappa0", kappa0);
      const auto cfg = proof_integrals_config_from_json(j);
      if (sh.print_config) return run_or_print(cfg, [](const auto& c) { return proof_integrals_report(c); }, sh, out);
      auto rep = proof_integrals_report(cfg);
      if (rep.summary.contains("sup")) {
        const auto& s = rep.summary["sup"];
        out << "sup_integral = " << (s.is_number() ? fmt_value(s.get<double>()) : "inf") << "\n";
      }
      if (rep.summary.contains("time_tail")) {
        out << "time_tail = " << fmt_value(rep.summary["time_tail"].get<double>()) << "\n";
      }
      return finish(std::move(rep), sh, out);
    };
  });

  auto* vm = verify->add_subcommand("mc", "Monte Carlo moments of the stochastic convolution");
  std::optional<double> mc_t;
  std::optional<std::size_t> paths;
  vm->add_option("--config", config_path, "JSON config (schema_version 1)");
  vm->add_option("--kappa0", kappa0, "Opening angle (default: 3 pi / 2)");
  vm->add_option("--p", p, "Moment order (default: 2)");
  vm->add_option("--t", mc_t, "Time (default: 0.5)");
  vm->add_option("--paths", paths, "Number of paths (default: 10000)");
  vm->add_option("--seed", seed, "Seed (default: 1)");
  vm->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "kappa0", kappa0);
      overlay(j, "p", p);
      overlay(j, "t", mc_t);
      overlay(j, "n_paths", paths);
      overlay(j, "seed", seed);
      return run_or_print(monte_carlo_config_from_json(j), [](const auto& c) { return mc_moment_check(c); }, sh, out);
    };
  });

  // experiment --------------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "Estimate experiments")->require_subcommand(1);
  std::optional<double> T;

  auto* es = experiment->add_subcommand("sharpness", "Vertex-threshold sharpness scan");
  es->add_option("--config", config_path, "JSON config (schema_version 1)");
  es->add_option("--kappa0", kappa0, "Opening angle in (0, 2 pi] (default: 2 pi)");
  es->add_option("--p", p, "p (default: 2)");
  es->add_option("--T", T, "Horizon (default: 1)");
  es->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "kappa0", kappa0);
      overlay(j, "p", p);
      overlay(j, "T", T);
      return run_or_print(sharpness_config_from_json(j), [](const auto& c) { return sharpness_scan(c); }, sh, out);
    };
  });

  auto add_ratio = [&](const char* name, const char* what, bool stochastic) {
    auto* c = experiment->add_subcommand(name, what);
    c->add_option("--config", config_path, "JSON config (schema_version 1)");
    c->add_option("--kappa0", kappa0, "Opening angle (default: 3 pi / 2)");
    c->add_option("--T", T, "Horizon (default: 1)");
    c->callback([&, stochastic] {
      action = [&, stochastic] {
        Json j = load_config(config_path);
        overlay(j, "kappa0", kappa0);
        overlay(j, "T", T);
        return run_or_print(
            ratio_config_from_json(j, stochastic),
            [stochastic](const auto& c) { return stochastic ? main_estimate_ratio_scan(c) : det_estimate_ratio_scan(c); },
            sh, out);
      };
    });
  };
  add_ratio("stoch-ratio", "Stochastic estimate ratio scan", true);
  add_ratio("det-ratio", "Deterministic estimate ratio scan", false);

  auto* en = experiment->add_subcommand("solution-norm", "Solution-norm inequality check");
  en->add_option("--config", config_path, "JSON config (schema_version 1)");
  en->add_option("--kappa0", kappa0, "Opening angle (default: 3 pi / 2)");
  en->add_option("--p", p, "p (default: 2)");
  en->add_option("--theta", theta, "theta (default: 2)");
  en->add_option("--T", T, "Horizon (default: 1)");
  en->callback([&] {
    action = [&] {
      Json j = load_config(config_path);
      overlay(j, "kappa0", kappa0);
      if (p || theta) {
        if (!j.contains("params")) j["params"] = Json::object();
        overlay(j["params"], "p", p);
        overlay(j["params"], "theta", theta);
      }
      overlay(j, "T", T);
      return run_or_print(solution_norm_config_from_json(j), [](const auto& c) { return solution_norm_check(c); }, sh, out);
    };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    set_default_exec(Exec{sh.jobs ? *sh.jobs : jobs_from_env()});
    return action();
  } catch (const NonConvergent& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NonFinite& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace wedgeheat
