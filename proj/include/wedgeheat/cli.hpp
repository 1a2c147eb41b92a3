#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wedgeheat {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitPass = 0,       ///< every verdict passed
  kExitVerdict = 1,    ///< some verdict failed
  kExitUsage = 2,      ///< bad flags, bad or unknown config keys
  kExitNumerical = 3,  ///< NonConvergent / NonFinite
};

/// Runs the `wedgeheat` command line. `args` excludes the program name.
/// Reports go to --out; the verdict line and values go to `out`, errors and
/// help to `err` / `out` respectively.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, char** argv);

}  // namespace wedgeheat
