// Acceptance checks: one PASS/FAIL line per criterion. Run all, or one with
// --criterion NAME; exit status 1 if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../common/param_table.hpp"
#include "CLI11.hpp"
#include "wedgeheat/cli.hpp"
#include "wedgeheat/experiments.hpp"
#include "wedgeheat/report.hpp"

using namespace wedgeheat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
  void report(const ExperimentReport& r, const std::string& label) {
    for (const auto& v : r.verdicts) check(v.pass, label + " " + v.name + " (" + v.detail + ")");
  }
  const Verdict* find(const ExperimentReport& r, const std::string& name) {
    for (const auto& v : r.verdicts) {
      if (v.name == name) return &v;
    }
    check(false, r.kind + ": verdict " + name + " missing");
    return nullptr;
  }
  void verdict(const ExperimentReport& r, const std::string& name, const std::string& label) {
    if (const auto* v = find(r, name)) check(v->pass, label + " " + name + " (" + v->detail + ")");
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

const char* angle_name(double k0) {
  if (k0 == kPi / 2) return "pi/2";
  if (k0 == kPi) return "pi";
  if (k0 == 3 * kPi / 2) return "3pi/2";
  if (k0 == 2 * kPi) return "2pi";
  return "?";
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

// Byte-compares every file of two report directories.
bool same_files(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (!fs::exists(b / e.path().filename()) || slurp(e.path()) != slurp(b / e.path().filename())) return false;
    ++n;
  }
  std::size_t m = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++m;
  return n == m && n > 0;
}

Outcome kernel_oracle() {
  Outcome o;
  const auto rep = kernel_suite_report(KernelSuiteConfig::defaults(KernelSuite::images));
  o.report(rep, "images");
  return o;
}

Outcome kernel_identities() {
  Outcome o;
  for (auto s : {KernelSuite::symmetry, KernelSuite::scaling, KernelSuite::ck, KernelSuite::mass}) {
    const auto rep = kernel_suite_report(KernelSuiteConfig::defaults(s));
    o.report(rep, to_string(s));
    if (s == KernelSuite::mass) {
      // The half-plane point t = 1, x = (1, pi/2): mass erf(1/2).
      bool seen = false;
      for (const auto& row : rep.table("masses").rows) {
        if (std::get<double>(row[0]) == kPi && std::get<double>(row[1]) == 1.0 && std::get<double>(row[2]) == 1.0 &&
            std::get<double>(row[3]) == kPi / 2) {
          const double m = std::get<double>(row[4]);
          o.check(std::fabs(m - 0.5204998778) <= 1e-6, "half-plane mass " + num(m) + " vs erf(1/2) = 0.5204998778");
          seen = true;
        }
      }
      o.check(seen, "half-plane point present");
    }
  }
  return o;
}

Outcome kozlov_bound() {
  Outcome o;
  for (double k0 : {kPi / 2, kPi, 3 * kPi / 2}) {
    const std::string a = angle_name(k0);
    for (double f : {0.9, 1.1}) {
      GreenBoundConfig cfg;
      cfg.kappa0 = k0;
      cfg.lambda = f * kPi / k0;
      const auto rep = green_bound_report(cfg);
      const std::string label = "kappa0=" + a + " lambda=" + num(f) + "*pi/kappa0";
      o.verdict(rep, "classification", label);
      if (f < 1.0) {
        o.verdict(rep, "profile_slope", label);
      } else {
        o.verdict(rep, "vertex_growth", label);
      }
    }
  }
  auto decay = KernelSuiteConfig::defaults(KernelSuite::decay);
  o.report(kernel_suite_report(decay), "vertex decay");
  return o;
}

Outcome sharpness() {
  Outcome o;
  const std::pair<double, double> cases[] = {{2 * kPi, 2.0}, {3 * kPi / 2, 2.0}, {kPi / 2, 4.0}};
  for (const auto& [k0, p] : cases) {
    const auto rep = sharpness_scan(SharpnessConfig::around(k0, p));
    o.report(rep, std::string("kappa0=") + angle_name(k0) + " p=" + num(p));
  }
  // delta -> 0 value of the counterexample integral at theta = 2.
  CounterexampleSpec spec{};
  spec.kappa0 = 2 * kPi;
  spec.T = 1.0;
  spec.p = 2.0;
  spec.theta = 2.0;
  spec.epsilon = 1.0;
  const double c = counterexample_constant(spec);
  const double tiny = counterexample_integral(spec, 1e-12);
  const double target = kPi / 4;
  o.check(std::fabs(c - target) <= 1e-6, "closed form: C = " + num(c) + ", I(1e-12) = " + num(tiny) +
                                             ", expected pi/4 = " + num(target));
  return o;
}

Outcome main_estimate() {
  Outcome o;
  const auto cfg = RatioScanConfig::stochastic_default(3 * kPi / 2);
  const auto rep = main_estimate_ratio_scan(cfg);
  for (const char* v : {"stability", "growth", "t_independence"}) o.verdict(rep, v, "kappa0=3pi/2");
  return o;
}

Outcome det_estimate() {
  Outcome o;
  for (double k0 : {kPi / 2, 3 * kPi / 2}) {
    const auto rep = det_estimate_ratio_scan(RatioScanConfig::deterministic_default(k0));
    for (const char* v : {"stability", "growth"}) o.verdict(rep, v, std::string("kappa0=") + angle_name(k0));
  }
  return o;
}

Outcome proof_integrals() {
  Outcome o;
  ProofIntegralsConfig b0;
  b0.b = 0.0;
  const auto r0 = proof_integrals_report(b0);
  const double sup0 = r0.summary["sup"].get<double>();
  o.check(std::fabs(sup0 - kPi) <= 1e-10, "b=0: sup = " + num(sup0) + " vs pi");

  ProofIntegralsConfig tail;
  tail.exponent = 4.0;
  const auto rt = proof_integrals_report(tail);
  const double t4 = rt.summary["time_tail"].get<double>();
  o.check(std::fabs(t4 - 1.0 / 3) <= 1e-10, "exponent 4: " + num(t4) + " vs 1/3");

  ProofIntegralsConfig b1;
  b1.b = -1.0;
  const auto r1 = proof_integrals_report(b1);
  o.verdict(r1, "sup_bounded", "b=-1");
  o.verdict(r1, "sup_refinement", "b=-1");

  ProofIntegralsConfig b25;
  b25.b = -2.5;
  o.verdict(proof_integrals_report(b25), "divergence_detected", "b=-2.5");
  return o;
}

Outcome monte_carlo() {
  Outcome o;
  auto a = MonteCarloConfig::defaults(3 * kPi / 2);
  auto b = MonteCarloConfig::defaults(kPi / 2);
  b.p = 3.0;
  b.t = 1.0;
  auto c = MonteCarloConfig::defaults(kPi);
  c.p = 4.0;
  c.t = 0.25;
  c.seed = 7;
  for (const auto* cfg : {&a, &b, &c}) {
    const auto rep = mc_moment_check(*cfg);
    o.verdict(rep, "moments",
              std::string("kappa0=") + angle_name(cfg->kappa0) + " p=" + num(cfg->p) + " paths=" +
                  std::to_string(cfg->n_paths));
  }
  const auto serial = report_to_json(mc_moment_check(b, Exec::serial())).dump();
  bool same = true;
  for (int jobs : {2, 4}) same = same && report_to_json(mc_moment_check(b, Exec::with_jobs(jobs))).dump() == serial;
  o.check(same, "library: identical reports for jobs 1, 2, 4");

  // Through the command line: same argv apart from --jobs.
  const fs::path root = fs::temp_directory_path() / "wedgeheat_acceptance_mc";
  fs::remove_all(root);
  std::ostringstream sink;
  int codes = 0;
  for (const char* jobs : {"1", "3"}) {
    codes |= run_command({"--out", (root / jobs).string(), "--jobs", jobs, "verify", "mc", "--kappa0", "3.14159265",
                          "--p", "4"},
                         sink, sink);
  }
  o.check(codes == 0 && same_files(root / "1", root / "3"), "cli: byte-identical report files for --jobs 1 and 3");
  fs::remove_all(root);
  return o;
}

Outcome parameter_arithmetic() {
  Outcome o;
  const auto cases = wedgeheat::testing::param_cases();
  std::size_t bad = 0;
  for (const auto& c : cases) {
    const auto r = wedgeheat::testing::check_param_case(c);
    if (!r.ok) {
      ++bad;
      o.check(false, "p=" + num(wedgeheat::testing::to_double(c.p)) + " kappa0/pi=" +
                         num(wedgeheat::testing::to_double(c.angle)) + ": " + r.detail);
    }
  }
  o.check(bad == 0 && cases.size() == 50, std::to_string(cases.size() - bad) + "/" + std::to_string(cases.size()) +
                                              " cases exact");
  return o;
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
  double time_limit_s;  // 0: none
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"kernel_oracle", kernel_oracle, 5.0},
      {"kernel_identities", kernel_identities, 60.0},
      {"kozlov_bound", kozlov_bound, 0.0},
      {"sharpness", sharpness, 600.0},
      {"main_estimate_ratio", main_estimate, 0.0},
      {"det_estimate_ratio", det_estimate, 0.0},
      {"proof_integrals", proof_integrals, 0.0},
      {"monte_carlo", monte_carlo, 0.0},
      {"parameter_arithmetic", parameter_arithmetic, 0.0},
  };

  CLI::App app{"Acceptance criteria"};
  std::vector<std::string> names;
  std::vector<std::string> choices;
  for (const auto& c : all) choices.push_back(c.name);
  bool verbose = false;
  app.add_option("--criterion", names, "Criteria to run (default: all)")->check(CLI::IsMember(choices));
  app.add_flag("-v,--verbose", verbose, "Print every check, not only failures");
  CLI11_PARSE(app, argc, argv);

  bool ok = true;
  for (const auto& c : all) {
    if (!names.empty() && std::find(names.begin(), names.end(), c.name) == names.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0) {
      o.check(secs < c.time_limit_s, "runtime " + num(secs) + " s < " + num(c.time_limit_s) + " s");
    }
    std::printf("%s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.name, secs);
    for (const auto& n : o.notes) {
      if (verbose || n.rfind("FAILED", 0) == 0) std::printf("    %s\n", n.c_str());
    }
    std::fflush(stdout);
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
