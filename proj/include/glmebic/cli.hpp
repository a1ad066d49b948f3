#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glmebic {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point behind the `glmebic` executable. `args` excludes the program
/// name. Tables go to `out` (and to --output-dir when given), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glmebic
