#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seamforge {

// Exit codes: 0 success, 1 runtime/data error, 2 usage error.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

// Environment variable that overrides a corpus spec's output directory
// (an explicit --out-dir flag still wins).
inline constexpr const char* kOutputDirEnv = "SEAMFORGE_OUTPUT_DIR";

// Parses args (without the program name) and runs exactly one subcommand.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seamforge
