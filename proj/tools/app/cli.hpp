#pragma once

#include <iosfwd>

namespace fbrrt::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitSolver = 5,
};

/// Entry point of the fbrrt executable; never throws.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbrrt::app
