#pragma once

// Command-line front end. Exit codes: 0 success/pass, 1 verification
// failure, 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace ttpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "start:stop:step" (inclusive of stop within 1e-9 of a step) or a
/// comma-separated list. Throws std::invalid_argument on malformed input.
std::vector<double> parse_grid(const std::string& text);

}  // namespace ttpc::cli
