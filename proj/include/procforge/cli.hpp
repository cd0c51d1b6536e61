#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace procforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitErrors = 1;
inline constexpr int kExitNonConforming = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitNoInput = 66;

/// Runs `procforge <command> ...`. `args` excludes the program name.
/// Commands: validate, compile, simulate, conformance.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace procforge
