#pragma once

#include <filesystem>
#include <vector>

#include "cgn/exp/runner.hpp"
#include "cgn/metrics/stats.hpp"
#include "json.hpp"

namespace cgn::exp {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json summary_json(const metrics::SeedSummary& s);
nlohmann::json seed_json(const SeedMetrics& m);
/// Config snapshot, per-seed metrics and one summary per metric.
nlohmann::json run_json(const RunRecord& record);

/// Values of one metric over the seeds that produced it.
std::vector<double> metric_values(const std::vector<SeedMetrics>& seeds, const std::string& metric);

/// Merges runs into the report at `path`, replacing entries with the same
/// dataset and model; creates the file when absent.
void merge_report(const std::filesystem::path& path, const std::vector<nlohmann::json>& runs);

/// Plain-text comparison table (dataset x model x metric mean and interval).
std::string comparison_table(const nlohmann::json& report);

}  // namespace cgn::exp
