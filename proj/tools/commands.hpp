#pragma once

namespace coditkit::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

// Parses argv, runs one subcommand and returns the process exit status.
// Errors are reported on stderr as a single JSON object.
int run(int argc, const char* const* argv);

}  // namespace coditkit::cli
