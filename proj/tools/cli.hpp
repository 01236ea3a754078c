#pragma once

// Entry point shared by the schedpred executable and the end-to-end tests.

#include <ostream>
#include <string>
#include <vector>

namespace schedpred::cli {

/// Runs one invocation; args[0] is the program name. Returns the exit code:
/// 0 on success, 1 on a runtime error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace schedpred::cli
