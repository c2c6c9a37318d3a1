#pragma once

#include <ostream>

namespace dfs {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitNumericFailure = 3;
inline constexpr int kExitUsage = 4;

// Subcommands: bench, train, eval, gradcheck. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dfs
