#pragma once

namespace refracted {

// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNumerical = 2,
  kExitVerifyFailed = 3,
  kExitUsage = 64,
};

// Entry point of the `refracted` tool: subcommands roots, scale, factors,
// resolvent, simulate, verify.
int run(int argc, char** argv);

}  // namespace refracted
