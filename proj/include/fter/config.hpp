#pragma once

#include "fter/crowd.hpp"
#include "fter/engine.hpp"

#include <filesystem>
#include <optional>
#include <string_view>

namespace fter {

/**
 * Experiment description read from JSON. Relative paths resolve against the
 * config file's directory.
 *
 *   dataset      manifest path, or {"synthetic": {records, entities, zipf,
 *                exponent, max_entity_size, seed}}
 *   crowd        synthetic | replay | live
 *   noise        {fp, fn, seed}
 *   strategy     ers | urs | hs
 *   discipline   cer | fer | feer
 *   mode         seq | par
 *   execution    serial | parallel
 *   quorum, edge_budget, cer_votes, connectivity, max_batch,
 *   seed, repetitions, max_cost
 *   prefilter    {lower, upper}
 *   trace, clustering   output paths
 */
struct RunConfig {
    std::optional<std::filesystem::path> manifest;
    std::optional<SyntheticSpec> synthetic;
    bool live{false};
    ExperimentConfig experiment;
    std::optional<std::filesystem::path> trace_out;
    std::optional<std::filesystem::path> clustering_out;
};

/// Throws ConfigError on unknown keys, bad values or type mismatches.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads the manifest or generates the synthetic dataset.
Dataset load_dataset(const RunConfig& config);

Execution parse_execution(std::string_view name);

}  // namespace fter
