#pragma once

#include <cstdint>
#include <string>

#include "cgn/diff/rng.hpp"
#include "cgn/graph/graph.hpp"

namespace cgn::graph {

enum class SyntheticKind { BaShapes, BaCommunity, BaGrid, TreeCycles, TreeGrid };

/// Generator parameters for one motif benchmark.
struct DatasetSpec {
    SyntheticKind kind = SyntheticKind::BaShapes;
    /// BA base node count, or binary-tree depth (levels) for tree bases.
    std::size_t base_size = 300;
    std::size_t attachment_degree = 5;
    std::size_t motif_count = 80;
    /// Random edges added per community.
    std::size_t random_edges = 70;
    /// BA-Community only: random edges joining the two communities' base nodes.
    std::size_t bridge_edges = 70;
    std::uint64_t seed = 0;
};

/// Default generator parameters for a dataset id such as "ba-shapes".
/// Throws std::invalid_argument for an unknown id.
DatasetSpec default_spec(const std::string& id, std::uint64_t seed = 0);
SyntheticKind parse_synthetic_kind(const std::string& id);
std::string to_string(SyntheticKind kind);
bool is_synthetic_id(const std::string& id);

/// Generates the benchmark graph with labels, roles and motif annotations.
Dataset generate_synthetic(const DatasetSpec& spec);

/// Barabasi-Albert preferential attachment graph on n nodes.
std::vector<Edge> barabasi_albert(std::size_t n, std::size_t m, Rng& rng);
/// Balanced binary tree with `levels` levels (2^levels - 1 nodes).
std::vector<Edge> binary_tree(std::size_t levels);

}  // namespace cgn::graph
