#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "affgebroid/config.hpp"

namespace affgebroid {

struct CommandResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> written;
    /// One-line human summary.
    std::string message;
};

/// Runs the configured command and writes its artifacts under run.out_dir:
/// simulate -> trajectory.csv + summary.json, check -> report.json,
/// bracket -> bracket.csv, derive -> derive.csv.
CommandResult run_command(const Config& cfg);

}  // namespace affgebroid
