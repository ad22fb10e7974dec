#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cgn/diff/matrix.hpp"

namespace cgn::graph {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected simple graph with dense node features.
struct LabeledGraph {
    std::size_t node_count = 0;
    /// Undirected edges stored once with first < second; no self-loops.
    std::vector<Edge> edges;
    diff::Matrix features;
    /// Discrete node labels (atom types for molecules); empty when absent.
    std::vector<int> node_kinds;

    /// Validates the invariants and canonicalizes the edge list (sorted, deduplicated).
    void normalize();
    std::vector<std::vector<std::size_t>> adjacency() const;
    std::vector<std::size_t> degrees() const;
};

/// Ground-truth annotation of a node in a synthetic benchmark.
struct MotifAnnotation {
    int role = 0;
    std::optional<std::size_t> motif_id;
    bool attached_by_random_edge = false;
};

enum class TaskKind { Node, Graph };

/// A node-classification graph, or a graph-classification collection stored
/// as the disjoint union of its member graphs.
struct Dataset {
    std::string name;
    TaskKind task = TaskKind::Node;
    LabeledGraph graph;
    /// Graph tasks: node -> graph id, nondecreasing.
    std::vector<std::size_t> graph_indicator;
    /// Graph tasks: first node of each graph plus a final sentinel.
    std::vector<std::size_t> graph_offsets;
    /// One label per node (node task) or per graph (graph task).
    std::vector<int> labels;
    std::size_t num_classes = 0;
    /// Per node; only for synthetic node datasets.
    std::vector<MotifAnnotation> annotations;
    /// Original label values of a TU collection (index = mapped class).
    std::vector<int> graph_label_values;
    /// Original node label values of a TU collection (index = one-hot slot).
    std::vector<int> node_kind_values;

    std::size_t sample_count() const { return labels.size(); }
    std::size_t graph_count() const { return graph_offsets.empty() ? 0 : graph_offsets.size() - 1; }
    /// Member graph g of a graph-task collection, with local node ids.
    LabeledGraph member(std::size_t g) const;
};

/// Induced p-hop neighborhood around a center node.
struct Subgraph {
    /// Original node ids, center first, then breadth-first order.
    std::vector<std::size_t> nodes;
    /// Edges in local indices (first < second).
    std::vector<Edge> edges;
    /// Local index of the center (always 0).
    std::size_t center = 0;
    /// Optional node colors used by labeled edit distance.
    std::vector<int> kinds;

    std::size_t size() const { return nodes.size(); }
};

/// Induced subgraph over all nodes within `hops` of `node`.
Subgraph khop_subgraph(const LabeledGraph& g, const std::vector<std::vector<std::size_t>>& adjacency,
                       std::size_t node, std::size_t hops);
Subgraph khop_subgraph(const LabeledGraph& g, std::size_t node, std::size_t hops);

struct Split {
    std::vector<bool> train;
    std::vector<bool> test;
};

/// Stratified train/test split. Falls back to an unstratified split (with a
/// warning on stderr) when some class has fewer than two members.
Split make_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed);

}  // namespace cgn::graph
