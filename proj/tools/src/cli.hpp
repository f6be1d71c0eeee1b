#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rirkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs one invocation. `args` excludes the program name. Results go to
/// `out`; failures print a single JSON line {"error", "exit_code"} to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rirkit::cli
