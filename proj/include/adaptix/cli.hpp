#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace adaptix::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kRuntimeError = 2;

/// Runs one command line (without the program name). Artifacts are written
/// only after every computation has succeeded.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adaptix::cli
