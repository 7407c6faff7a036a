#pragma once

#include <string>
#include <vector>

namespace seqloc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

/// Runs the `seqloc` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace seqloc::cli
