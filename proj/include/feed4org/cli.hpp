#pragma once

// Operator command line. Everything that mutates goes through Platform, so
// the CLI writes exactly the events the HTTP service would.

#include <iosfwd>
#include <string>
#include <vector>

namespace feed4org {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace feed4org
