#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cohortflow::app {

/// Exit codes: 0 success, 1 data/model error, 2 usage error or missing input file.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cohortflow::app
