#include "cgn/gnn/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace cgn::gnn {

using diff::Var;

LayerKind parse_layer_kind(const std::string& s) {
    if (s == "gcn") return LayerKind::GCN;
    if (s == "gin") return LayerKind::GIN;
    if (s == "sage") return LayerKind::SAGE;
    throw std::invalid_argument("unknown layer kind '" + s + "' (expected gcn, gin or sage)");
}

std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::GCN: return "gcn";
        case LayerKind::GIN: return "gin";
        case LayerKind::SAGE: return "sage";
    }
    return "unknown";
}

GraphOperators build_operators(std::size_t n, const std::vector<graph::Edge>& edges) {
    std::vector<double> degree(n, 0.0);
    for (const auto& [u, v] : edges) {
        degree[u] += 1.0;
        degree[v] += 1.0;
    }
    using Triplets = std::vector<std::tuple<std::size_t, std::size_t, double>>;
    Triplets norm, sum, mean;
    norm.reserve(2 * edges.size() + n);
    sum.reserve(2 * edges.size() + n);
    mean.reserve(2 * edges.size());
    for (std::size_t i = 0; i < n; ++i) {
        norm.emplace_back(i, i, 1.0 / (degree[i] + 1.0));
        sum.emplace_back(i, i, 1.0);
    }
    for (const auto& [u, v] : edges) {
        const double w = 1.0 / std::sqrt((degree[u] + 1.0) * (degree[v] + 1.0));
        norm.emplace_back(u, v, w);
        norm.emplace_back(v, u, w);
        sum.emplace_back(u, v, 1.0);
        sum.emplace_back(v, u, 1.0);
        mean.emplace_back(u, v, 1.0 / degree[u]);
        mean.emplace_back(v, u, 1.0 / degree[v]);
    }
    GraphOperators ops;
    ops.node_count = n;
    ops.gcn_norm = std::make_shared<const diff::SparseOperator>(diff::SparseMatrix::from_triplets(n, n, std::move(norm)));
    ops.self_plus_sum = std::make_shared<const diff::SparseOperator>(diff::SparseMatrix::from_triplets(n, n, std::move(sum)));
    ops.neighbor_mean = std::make_shared<const diff::SparseOperator>(diff::SparseMatrix::from_triplets(n, n, std::move(mean)));
    return ops;
}

namespace {
Var activate(Var x, bool final_layer) { return final_layer ? x : diff::leaky_relu(x, kLeakySlope); }
}  // namespace

Var gcn_layer(const GraphOperators& ops, Var h, Var w, Var b, bool final_layer) {
    Var hw = diff::matmul(h, w);
    return activate(diff::add_row(diff::spmm(ops.gcn_norm, hw), b), final_layer);
}

Var gin_layer(const GraphOperators& ops, Var h, Var w1, Var b1, Var w2, Var b2, bool final_layer) {
    Var agg = diff::spmm(ops.self_plus_sum, h);
    Var hidden = diff::relu(diff::add_row(diff::matmul(agg, w1), b1));
    return activate(diff::add_row(diff::matmul(hidden, w2), b2), final_layer);
}

Var sage_layer(const GraphOperators& ops, Var h, Var w_self, Var w_neigh, Var b, bool final_layer) {
    Var self = diff::matmul(h, w_self);
    Var neigh = diff::matmul(diff::spmm(ops.neighbor_mean, h), w_neigh);
    return activate(diff::add_row(diff::add(self, neigh), b), final_layer);
}

}  // namespace cgn::gnn
