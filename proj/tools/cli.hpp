#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace follownet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args excludes the program name). Usage problems
/// return kExitUsage; library errors print a JSON error record to `err` and
/// return kExitDataError.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace follownet::cli
