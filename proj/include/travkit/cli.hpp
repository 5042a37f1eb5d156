#pragma once

#include <string>
#include <vector>

namespace travkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `travkit` binary. args[0] is the program name.
/// Returns 0 on success, 1 on domain errors (skip-only jobs, planning
/// failure, unreadable inputs), 2 on usage or configuration errors.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace travkit
