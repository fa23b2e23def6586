#pragma once

#include <string>
#include <vector>

namespace ipc {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point shared by the `ipc` binary and the tests. `args[0]` is the
/// program name.
int cli_main(const std::vector<std::string>& args);
int cli_main(int argc, char** argv);

}  // namespace ipc
