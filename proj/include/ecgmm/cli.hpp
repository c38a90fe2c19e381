#pragma once

#include <iosfwd>

namespace ecgmm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `ecgmm` tool: subcommands train, embed, eval, stats and
// generate. Messages go to `err`; results only to files.
int run_cli(int argc, const char* const* argv, std::ostream& err);

}  // namespace ecgmm
