// Command-line front end: subcommands region, tradeoff, simulate, schedule
// and validate, each driven by an ExperimentConfig.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ehsc/config.hpp"

namespace ehsc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitValidation = 2;

struct CommandOutput {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> files;
};

/// Each command writes into `out` (created if missing). `parallel` selects
/// the OpenMP sweeps; the serial path gives identical files.
CommandOutput cmd_region(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel);
CommandOutput cmd_tradeoff(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel);
CommandOutput cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel);
CommandOutput cmd_schedule(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel);
/// Prints one PASS/FAIL line per check to `log`; exit code 2 on any failure.
CommandOutput cmd_validate(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel,
                           std::ostream& log);

/// Dispatch on config.kind.
CommandOutput execute(const ExperimentConfig& config, const std::filesystem::path& out, bool parallel,
                      std::ostream& log);

/// Applies a --resolution override to every grid of the config.
void apply_resolution(ExperimentConfig& config, std::size_t n);

int run_cli(int argc, char** argv);

} // namespace ehsc
