#pragma once

#include <iosfwd>

namespace lis {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point behind the lisbench executable. Subcommands: generate,
/// poison, bench, report, sweep. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lis
