#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flexarm::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kCertificateFailure = 3,
  kDivergence = 4,
};

/// Environment variable naming the default output directory for `run`.
inline constexpr const char* kOutDirEnv = "FLEXARM_OUT_DIR";

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flexarm::cli
