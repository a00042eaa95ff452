#pragma once

// Command-line front end. Kept as a library function so tests can drive it
// with string streams instead of spawning processes.
//
// Exit codes: 0 success, 2 bad parameters or usage, 3 numeric failure.

#include <iosfwd>

namespace repchain {

inline constexpr int kExitOk = 0;
inline constexpr int kExitParameter = 2;
inline constexpr int kExitNumeric = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace repchain
