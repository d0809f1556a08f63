#pragma once

#include <iosfwd>

namespace phasetop {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;

/// Entry point of the command-line tool; returns the process exit code.
int cliMain(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phasetop
