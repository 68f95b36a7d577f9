#pragma once

#include <iosfwd>

namespace spod::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_data_error = 2,
  exit_convergence_failure = 3,
};

/// Entry point of the `spod` tool. Results go to `out`, diagnostics and
/// progress to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spod::cli
