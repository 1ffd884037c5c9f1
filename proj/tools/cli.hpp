#pragma once

#include <iosfwd>

namespace chaoslab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kBudgetExceeded = 3,
  kCheckFailed = 4,
};

// Full command line front-end; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace chaoslab::cli
