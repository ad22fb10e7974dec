#pragma once

#include <memory>
#include <string>

#include "cgn/diff/ops.hpp"
#include "cgn/graph/graph.hpp"

namespace cgn::gnn {

enum class LayerKind { GCN, GIN, SAGE };

LayerKind parse_layer_kind(const std::string& s);
std::string to_string(LayerKind k);

inline constexpr double kLeakySlope = 0.01;

/// Constant aggregation operators of one graph (or a block-diagonal batch).
struct GraphOperators {
    std::size_t node_count = 0;
    /// D^-1/2 (A + I) D^-1/2 with degrees counted including the self-loop.
    std::shared_ptr<const diff::SparseOperator> gcn_norm;
    /// A + I: self term plus neighbor sum (GIN with epsilon fixed to 0).
    std::shared_ptr<const diff::SparseOperator> self_plus_sum;
    /// D^-1 A: neighbor mean; rows of isolated nodes are empty.
    std::shared_ptr<const diff::SparseOperator> neighbor_mean;
};

GraphOperators build_operators(std::size_t node_count, const std::vector<graph::Edge>& edges);

/// act(Â H W + b); act is the leaky rectifier, or identity when `final_layer`.
diff::Var gcn_layer(const GraphOperators& ops, diff::Var h, diff::Var w, diff::Var b, bool final_layer);

/// MLP(H_i + sum of neighbor rows), MLP = W2 relu(W1 x + b1) + b2, followed by
/// the leaky rectifier unless `final_layer`.
diff::Var gin_layer(const GraphOperators& ops, diff::Var h, diff::Var w1, diff::Var b1, diff::Var w2, diff::Var b2,
                    bool final_layer);

/// act(H W_self + mean_{k in N(i)} H_k W_neigh + b); empty neighborhoods contribute 0.
diff::Var sage_layer(const GraphOperators& ops, diff::Var h, diff::Var w_self, diff::Var w_neigh, diff::Var b,
                     bool final_layer);

}  // namespace cgn::gnn
