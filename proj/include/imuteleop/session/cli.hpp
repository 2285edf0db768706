// Command-line front end: calibrate, simulate, replay, report, serve.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imuteleop {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitBadInput = 2,
  kExitNoConvergence = 3,
  kExitReplayMismatch = 4,
};

/// Environment variable naming the default `serve` config file.
inline constexpr const char* kConfigEnvVar = "IMUTELEOP_CONFIG";

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace imuteleop
