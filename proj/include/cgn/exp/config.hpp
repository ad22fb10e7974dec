#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgn/gnn/model.hpp"

namespace cgn::exp {

/// Invalid configuration: unknown dataset or key, malformed value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::uint64_t> kDefaultSeeds = {42, 19, 76, 58, 92};

struct RunConfig {
    std::string dataset = "ba-shapes";
    /// Architecture and training settings; the seed is set per run.
    gnn::ModelConfig model;
    /// k for the k-Means concept baseline.
    std::size_t baseline_k = 10;
    /// Neighborhood radius of concept representatives.
    std::size_t hops = 2;
    std::vector<std::uint64_t> seeds = kDefaultSeeds;
    /// Seed of the dataset generator and of the train/test split.
    std::uint64_t data_seed = 0;
    double train_fraction = 0.8;
    /// Graphs kept from the large social collection unless `full`.
    std::size_t subsample = 500;
    bool full = false;
    std::string data_dir = "data";

    bool operator==(const RunConfig& o) const;
};

/// Dataset ids accepted by the runner.
const std::vector<std::string>& known_datasets();
const std::vector<std::string>& synthetic_datasets();
bool is_graph_task(const std::string& dataset);

/// Per-dataset architecture and training defaults.
RunConfig default_run_config(const std::string& dataset);

/// Sets one `key = value` entry. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` text with optional `[dataset]` sections. Keys before any
/// section apply to every dataset; a section's keys apply only when it names
/// `dataset`. Lines starting with '#' are comments.
RunConfig parse_run_config(const std::string& text, const std::string& dataset);
RunConfig load_run_config(const std::filesystem::path& path, const std::string& dataset);
/// Renders every setting; parse_run_config(render_run_config(c), c.dataset) == c.
std::string render_run_config(const RunConfig& cfg);

}  // namespace cgn::exp
