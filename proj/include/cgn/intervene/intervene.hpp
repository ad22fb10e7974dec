#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgn/cem/concepts.hpp"
#include "cgn/gnn/model.hpp"
#include "cgn/metrics/stats.hpp"

namespace cgn::intervene {

struct OracleEntry {
    std::uint64_t pattern = 0;
    /// Target fuzzy encoding; booleanizes to `pattern`.
    std::vector<double> q;
    /// Training nodes the entry was derived from.
    std::size_t support = 0;
};

/// Target encodings keyed by ground-truth role (synthetic node tasks) or by
/// task label (graph tasks).
struct OracleTable {
    std::string policy;
    std::map<int, OracleEntry> entries;

    const OracleEntry* find(int key) const;
};

/// Per role: r* is the most frequent pattern among training nodes of that role
/// (lowest pattern on ties) and q* the mean encoding of the nodes carrying it.
OracleTable build_role_oracle(const diff::Matrix& q, const cem::BooleanConcept& r, const std::vector<int>& roles,
                              const std::vector<bool>& train);

/// Per task label: the concept cluster whose training members most purely
/// belong to samples of that label (larger cluster on ties). `node_labels`
/// carries the label of each node's sample and `train` marks training nodes.
OracleTable build_label_oracle(const cem::ClusterTable& table, const std::vector<int>& node_labels,
                               const std::vector<bool>& train);

/// Nodes a scripted expert may correct: `candidates` whose key has an oracle
/// entry and whose pattern differs from it.
std::vector<std::size_t> eligible_nodes(const OracleTable& oracle, const cem::BooleanConcept& r,
                                        const std::vector<int>& keys, const std::vector<bool>& candidates);

/// Sets q := q* for the first `budget` nodes of `order`; clamps to its length.
diff::Matrix apply_interventions(const diff::Matrix& q, const OracleTable& oracle, const std::vector<int>& keys,
                                 const std::vector<std::size_t>& order, std::size_t budget);

/// Accuracy after each budget; `budgets` lists the counts sampled.
struct SeedCurve {
    std::vector<std::size_t> budgets;
    std::vector<double> accuracy;
    std::size_t eligible = 0;
};

/// Intervention budgets sampled: every count up to `dense_until`, then evenly
/// spaced so that at most `max_points` points are evaluated, ending at `eligible`.
std::vector<std::size_t> budget_schedule(std::size_t eligible, std::size_t dense_until = 50, std::size_t max_points = 200);

/// Predictions are recomputed by the readout only; `sample_labels` and
/// `test` are per sample (node or graph). `max_budget` caps the largest count.
SeedCurve intervention_curve(const gnn::GnnModel& model, const gnn::GraphBatch& batch, const diff::Matrix& q,
                             const OracleTable& oracle, const std::vector<int>& keys,
                             const std::vector<bool>& candidates, const std::vector<int>& sample_labels,
                             const std::vector<bool>& test, std::uint64_t seed,
                             std::optional<std::size_t> max_budget = std::nullopt);

struct CurvePoint {
    std::size_t budget = 0;
    metrics::SeedSummary summary;
};

/// Mean and confidence band across seeds; shorter curves are held at their
/// final accuracy.
std::vector<CurvePoint> aggregate_curves(const std::vector<SeedCurve>& curves);

/// `budget,mean_accuracy,ci_low,ci_high` rows.
std::string curve_csv(const std::vector<CurvePoint>& points);

}  // namespace cgn::intervene
