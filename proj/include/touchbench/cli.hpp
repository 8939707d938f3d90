#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace touchbench {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitIoError = 3 };

// Runs one `touchbench` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace touchbench
