#pragma once

#include <string>
#include <vector>

namespace bellkit::cli {

/// Exit codes: 0 success, 1 a module reported an error (partial results and a
/// failure manifest are still written), 2 bad invocation or configuration.
int run(const std::vector<std::string>& args);

}  // namespace bellkit::cli
