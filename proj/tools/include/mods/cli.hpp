#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mods::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the real process environment.
EnvLookup process_env();

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics and the resolved run configuration to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

}  // namespace mods::cli
