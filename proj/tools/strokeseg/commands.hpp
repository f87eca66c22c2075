#pragma once

#include "strokeseg/error.hpp"

namespace strokeseg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitInfeasible = 4,
};

int exit_code_for(ErrorCode code);

// Parses argv, runs the subcommand, and maps failures to exit codes.
int run(int argc, const char* const* argv);

}  // namespace strokeseg::cli
