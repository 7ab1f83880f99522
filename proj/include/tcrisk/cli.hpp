#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tcrisk::cli {

enum ExitCode : int { kPass = 0, kViolated = 1, kInputError = 2 };

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcrisk::cli
