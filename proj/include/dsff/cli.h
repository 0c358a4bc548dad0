// cli.h

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsff {

// Exit codes of the dsff tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitFormat = 5,
  kExitInvalidInput = 6,
  kExitNumeric = 7,
};

// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsff
