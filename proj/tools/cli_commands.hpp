#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowdcount::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kDataError = 3;

// Parses the command line and dispatches to a subcommand. Never throws:
// failures are reported on `err` and mapped to an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crowdcount::cli
