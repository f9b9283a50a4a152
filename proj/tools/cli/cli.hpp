#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace palign::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad parameters or data
inline constexpr int kExitIo = 3;     // unreadable, missing or malformed files

/// Runs the command line `args` (program name excluded) and returns the
/// process exit code. Diagnostics go to `err`, a one-line summary to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace palign::cli
