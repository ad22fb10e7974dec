#include "cgn/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <queue>
#include <stdexcept>

#include "cgn/diff/rng.hpp"

namespace cgn::graph {

void LabeledGraph::normalize() {
    for (auto& [u, v] : edges) {
        if (u >= node_count || v >= node_count) {
            throw std::invalid_argument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                        ") outside node range " + std::to_string(node_count));
        }
        if (u == v) throw std::invalid_argument("self-loop on node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (features.rows != node_count) {
        throw std::invalid_argument("feature rows " + std::to_string(features.rows) + " != node count " +
                                    std::to_string(node_count));
    }
}

std::vector<std::vector<std::size_t>> LabeledGraph::adjacency() const {
    std::vector<std::vector<std::size_t>> adj(node_count);
    for (const auto& [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

std::vector<std::size_t> LabeledGraph::degrees() const {
    std::vector<std::size_t> d(node_count, 0);
    for (const auto& [u, v] : edges) {
        ++d[u];
        ++d[v];
    }
    return d;
}

LabeledGraph Dataset::member(std::size_t g) const {
    if (task != TaskKind::Graph) throw std::logic_error("Dataset::member on a node-task dataset");
    const std::size_t lo = graph_offsets.at(g), hi = graph_offsets.at(g + 1);
    LabeledGraph out;
    out.node_count = hi - lo;
    out.features = diff::Matrix(hi - lo, graph.features.cols);
    for (std::size_t i = lo; i < hi; ++i) {
        for (std::size_t j = 0; j < graph.features.cols; ++j) out.features(i - lo, j) = graph.features(i, j);
    }
    auto first = std::lower_bound(graph.edges.begin(), graph.edges.end(), Edge{lo, 0});
    for (auto it = first; it != graph.edges.end() && it->first < hi; ++it) out.edges.emplace_back(it->first - lo, it->second - lo);
    if (!graph.node_kinds.empty()) out.node_kinds.assign(graph.node_kinds.begin() + lo, graph.node_kinds.begin() + hi);
    return out;
}

Subgraph khop_subgraph(const LabeledGraph& g, const std::vector<std::vector<std::size_t>>& adjacency,
                       std::size_t node, std::size_t hops) {
    if (node >= g.node_count) throw std::out_of_range("khop_subgraph: node " + std::to_string(node));
    Subgraph sub;
    std::map<std::size_t, std::size_t> local;
    std::queue<std::pair<std::size_t, std::size_t>> frontier;
    local[node] = 0;
    sub.nodes.push_back(node);
    frontier.emplace(node, 0);
    while (!frontier.empty()) {
        auto [u, d] = frontier.front();
        frontier.pop();
        if (d == hops) continue;
        for (std::size_t v : adjacency[u]) {
            if (local.contains(v)) continue;
            local[v] = sub.nodes.size();
            sub.nodes.push_back(v);
            frontier.emplace(v, d + 1);
        }
    }
    for (std::size_t a = 0; a < sub.nodes.size(); ++a) {
        for (std::size_t v : adjacency[sub.nodes[a]]) {
            auto it = local.find(v);
            if (it != local.end() && a < it->second) sub.edges.emplace_back(a, it->second);
        }
    }
    std::sort(sub.edges.begin(), sub.edges.end());
    if (!g.node_kinds.empty()) {
        for (std::size_t v : sub.nodes) sub.kinds.push_back(g.node_kinds[v]);
    }
    return sub;
}

Subgraph khop_subgraph(const LabeledGraph& g, std::size_t node, std::size_t hops) {
    return khop_subgraph(g, g.adjacency(), node, hops);
}

Split make_split(const std::vector<int>& labels, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("make_split: fraction must lie in (0, 1)");
    }
    Rng rng(seed);
    Split s;
    s.train.assign(labels.size(), false);
    s.test.assign(labels.size(), true);

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    bool stratify = true;
    for (const auto& [c, members] : by_class) stratify = stratify && members.size() >= 2;

    auto take = [&](std::vector<std::size_t> members) {
        rng.shuffle(members);
        const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(members.size())));
        for (std::size_t k = 0; k < n_train && k < members.size(); ++k) {
            s.train[members[k]] = true;
            s.test[members[k]] = false;
        }
    };
    if (stratify) {
        for (const auto& [c, members] : by_class) take(members);
    } else {
        std::cerr << "warning: make_split: a class has fewer than 2 members, using an unstratified split\n";
        std::vector<std::size_t> all(labels.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(all);
    }
    return s;
}

}  // namespace cgn::graph
