#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qmt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitResource = 3;

struct Options {
    std::optional<std::string> config_path;  // optional only for fig2
    std::optional<std::string> out_dir;
    std::optional<std::string> formats;      // comma list, overrides the config
    int threads = 1;
    unsigned long long seed = 0;             // reserved
};

// Runs `bound`, `simulate`, `sweep` or `fig2`; returns the process exit code.
// Human-readable progress goes to `out`, diagnostics to `err`.
int run_command(const std::string& command, const Options& options, std::ostream& out, std::ostream& err);

} // namespace qmt::cli
