#pragma once

#include <string>
#include <vector>

namespace drk::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 strict refusal.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRefused = 3;

// Subcommands: ingest, index, ask, eval, verify-file. args exclude the
// program name. Output goes to stdout, diagnostics to stderr.
int run_command(const std::vector<std::string>& args);

} // namespace drk::cli
