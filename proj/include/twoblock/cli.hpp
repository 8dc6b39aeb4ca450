#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twoblock::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one command line (without the program name). Errors go to `err`
/// prefixed with "ERROR:"; returns 0 on success, 1 on usage errors and 2 on
/// data or numeric failures.
///
/// Subcommands: fit, predict, simulate, cv, weights. Any subcommand accepts
/// --config FILE with key=value lines; explicit command-line flags win.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twoblock::cli
