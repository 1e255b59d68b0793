#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bgw::cli {

inline constexpr int kExitUsage = 64;

/// Parses argv, runs the requested subcommand and returns the process exit
/// code: 0 all checks pass, 2 a verdict failed, 3 invalid report or runtime
/// failure, 64 usage error.
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Golden values; prints one PASS/FAIL line per check, returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace bgw::cli
