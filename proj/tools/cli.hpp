#pragma once

#include <iosfwd>

namespace linsde::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kComputationFailure = 1, kInputError = 2 };

/// Runs the CLI with the given arguments (argv[0] is the program name),
/// writing reports to `out` and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linsde::cli
