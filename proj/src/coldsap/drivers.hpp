#pragma once

#include "coldsap/config.hpp"
#include "coldsap/table_io.hpp"

#include <string>
#include <vector>

namespace coldsap {

struct RunOptions {
    std::string out_dir = ".";
    int jobs = 1;
    bool dry_run = false;
};

struct RunSummary {
    RunManifest manifest;
    std::vector<std::string> messages;
};

const std::vector<std::string>& subcommand_names();

// Checks that the subcommand exists and can run on this configuration.
void check_subcommand(const std::string& name, const ExperimentConfig& cfg);

// Runs one subcommand, writing its tables, plot scripts, the canonical config
// and manifest.json below opts.out_dir. A dry run only performs the checks.
RunSummary run_subcommand(const std::string& name, const ExperimentConfig& cfg, const RunOptions& opts);

// Config and subcommand recorded by an earlier run.
std::pair<ExperimentConfig, std::string> config_from_manifest(const std::string& path);

} // namespace coldsap
