#ifndef GESA_CLI_CLI_H_
#define GESA_CLI_CLI_H_

#include <ostream>

namespace gesa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Dispatches `gesa <subcommand> ...`. Results go to `out` or to the files
// named by the flags, diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace gesa::cli

#endif  // GESA_CLI_CLI_H_
