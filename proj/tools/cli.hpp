#pragma once

#include <iosfwd>

namespace swiss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // bad arguments, unreadable or malformed input
inline constexpr int kExitNumerical = 2;  // a decomposition or estimate failed

/// Runs the `swiss` command line. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace swiss::cli
