#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cgn/graph/graph.hpp"

namespace cgn::metrics {

/// Small graph for edit distance: node colors are optional.
struct EditGraph {
    std::size_t node_count = 0;
    std::vector<graph::Edge> edges;
    std::vector<int> kinds;

    static EditGraph from_subgraph(const graph::Subgraph& s, bool use_kinds);
};

struct GedOptions {
    /// Graphs above this many nodes are not compared.
    std::size_t size_cap = 13;
    /// Cost of substituting nodes of different kinds (kinds compared only when both graphs carry them).
    int relabel_cost = 1;
    /// Search states expanded before giving up.
    std::size_t expansion_budget = 2'000'000;
};

struct GedResult {
    std::optional<int> distance;
    /// Why no distance was produced ("over-cap" or "budget").
    std::string skipped;
};

/// Exact edit distance with unit node/edge insertion and deletion costs, by A*
/// search over node assignments.
GedResult graph_edit_distance(const EditGraph& a, const EditGraph& b, const GedOptions& opt = {});

/// Per-concept purity record.
struct ConceptPurity {
    std::size_t cluster = 0;
    std::optional<double> score;
    std::optional<int> ged_second;
    std::optional<int> ged_third;
    std::string skipped;
};

struct PurityReport {
    std::vector<ConceptPurity> concepts;
    /// Minimum over eligible concepts of the mean of both distances.
    std::optional<double> minimum;
    /// Minimum over eligible concepts of the smaller of both distances.
    std::optional<double> minimum_pairwise;
    std::size_t eligible = 0;
};

/// Purity from the top three representatives of each concept, given as
/// neighborhoods ordered by closeness to the centroid. Concepts with fewer
/// than three neighborhoods are ineligible.
PurityReport concept_purity(const std::vector<std::vector<graph::Subgraph>>& representatives, bool use_kinds,
                            const GedOptions& opt);

/// Size cap used for a dataset id.
std::size_t ged_size_cap(const std::string& dataset);

}  // namespace cgn::metrics
