#pragma once

#include <iosfwd>

namespace rigidity::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFailedVerdict = 1;
inline constexpr int kExitUsage = 2;

/// Parses the command line, runs the subcommand and returns the exit status:
/// 0 when every verdict passes, 1 on a failed verdict or run, 2 on a usage or
/// configuration error. Human-readable output goes to `out`, diagnostics to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rigidity::cli
