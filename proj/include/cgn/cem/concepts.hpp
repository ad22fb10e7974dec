#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgn/diff/ops.hpp"
#include "cgn/graph/graph.hpp"

// Concept Encoder Module: differentiable fuzzy concept memberships, their
// Booleanization, and the exact-pattern clustering built on top of them.

namespace cgn::cem {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kDefaultTau = 0.5;
/// Clusters at or below this size are flagged as rare-concept candidates.
inline constexpr std::size_t kRareClusterSize = 3;
inline constexpr std::size_t kRepresentativeCount = 5;

/// Row softmax followed by division by (row max + eps). Differentiable.
diff::Var fuzzify(diff::Var h, double eps = kDefaultEpsilon);
/// Tape-free evaluation of `fuzzify`.
diff::Matrix fuzzify(const diff::Matrix& h, double eps = kDefaultEpsilon);

/// Per-row bit patterns; bit u of `rows[i]` is r_iu. Widths up to 64.
struct BooleanConcept {
    std::size_t width = 0;
    std::vector<std::uint64_t> rows;

    bool bit(std::size_t i, std::size_t u) const { return (rows[i] >> u) & 1U; }
    std::size_t size() const { return rows.size(); }
};

/// r_iu = 1 iff q_iu >= tau.
BooleanConcept booleanize(const diff::Matrix& q, double tau = kDefaultTau);
std::string pattern_string(std::uint64_t pattern, std::size_t width);

struct Cluster {
    std::uint64_t pattern = 0;
    std::vector<std::size_t> members;
    /// Mean fuzzy encoding over the members.
    std::vector<double> centroid;
    bool rare = false;
};

/// Nodes grouped by exact pattern equality. Clusters are ordered by
/// decreasing size, ties by increasing pattern value.
struct ClusterTable {
    std::size_t width = 0;
    std::vector<Cluster> clusters;
    /// Cluster index of each sample.
    std::vector<std::size_t> assignment;

    std::optional<std::size_t> find(std::uint64_t pattern) const;
};

ClusterTable assign_clusters(const BooleanConcept& r, const diff::Matrix& q);

/// Per-graph mean of node encodings (rows of q grouped by graph id).
diff::Var pool_graph(diff::Var q, std::span<const std::size_t> graph_indicator, std::size_t graph_count);

/// One representative slot; empty when the cluster has fewer members than slots.
struct Representative {
    std::optional<std::size_t> node;
    std::optional<graph::Subgraph> neighborhood;
    double distance = 0.0;

    bool exhausted() const { return !node.has_value(); }
};

/// Members closest (Euclidean over q) to the cluster centroid, ties by node
/// index, each with its p-hop neighborhood; padded to kRepresentativeCount
/// with exhausted slots.
std::vector<std::vector<Representative>> concept_representatives(const ClusterTable& table, const diff::Matrix& q,
                                                                 const graph::LabeledGraph& g, std::size_t hops);

/// Graphviz rendering of one concept: one subgraph per representative; the
/// center node is filled blue, its neighbors orange, exhausted slots grey.
std::string concept_dot(const Cluster& cluster, std::size_t cluster_index, std::size_t width,
                        const std::vector<Representative>& reps);

}  // namespace cgn::cem
