#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace imtl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitAbort = 3;

/// Process environment consulted by the commands.
struct Environment {
    std::optional<std::string> imtl_seed;
    static Environment from_process();
};

/// Parses `args` (without the program name) and runs the subcommand.
/// Machine-readable progress goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const Environment& env = Environment::from_process());

}  // namespace imtl::cli
