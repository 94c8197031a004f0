#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iamod {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitInfeasible = 4,
  kExitInternal = 5,
};

/// Runs the command-line tool. `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace iamod
