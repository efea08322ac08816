#pragma once

#include <iosfwd>
#include <string>

namespace ness::cli {

/// Exit codes of the command-line front end.
inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_numerical = 3;

/// Parse and run one ness_lab invocation. Data goes to `out` unless --out names a
/// file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest-safe round-trip form used in every CSV cell: printf "%.17g".
std::string format_double(double v);

}  // namespace ness::cli
