#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace groupblame::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;    // diagnostics or a failed validation
inline constexpr int kExitUsage = 2;      // bad arguments
inline constexpr int kExitToleranceBreach = 3;  // `demo` missed a stored expectation

// Runs one command line (without the program name). Reports go to `out`,
// diagnostics and errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace groupblame::cli
