#pragma once

#include <iosfwd>

namespace plf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;      // bad arguments, malformed or invalid input
inline constexpr int kExitIo = 3;         // unreadable input or unwritable output
inline constexpr int kExitNumerical = 4;  // estimation or numerical failure

/// Entry point for the `plflab` command; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plf::cli
