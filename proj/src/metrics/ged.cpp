#include "cgn/metrics/ged.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>
#include <stdexcept>

namespace cgn::metrics {

EditGraph EditGraph::from_subgraph(const graph::Subgraph& s, bool use_kinds) {
    EditGraph g;
    g.node_count = s.size();
    g.edges = s.edges;
    if (use_kinds) g.kinds = s.kinds;
    return g;
}

namespace {

using Mask = std::uint64_t;

std::vector<Mask> adjacency_bits(const EditGraph& g) {
    std::vector<Mask> adj(g.node_count, 0);
    for (const auto& [u, v] : g.edges) {
        if (u >= g.node_count || v >= g.node_count || u == v) throw std::invalid_argument("graph_edit_distance: bad edge");
        adj[u] |= Mask{1} << v;
        adj[v] |= Mask{1} << u;
    }
    return adj;
}

struct State {
    std::size_t parent;
    int target;  // G2 node, or -1 for deletion
    std::size_t depth;
    Mask used;
    int cost;
};

struct Entry {
    int f;
    std::size_t depth;
    std::size_t id;
};

struct EntryOrder {
    bool operator()(const Entry& a, const Entry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id > b.id;
    }
};

}  // namespace

GedResult graph_edit_distance(const EditGraph& a, const EditGraph& b, const GedOptions& opt) {
    if (a.node_count > opt.size_cap || b.node_count > opt.size_cap) return {std::nullopt, "over-cap"};
    if (a.node_count > 64 || b.node_count > 64) return {std::nullopt, "over-cap"};
    const bool labeled = !a.kinds.empty() && !b.kinds.empty();
    if (labeled && (a.kinds.size() != a.node_count || b.kinds.size() != b.node_count)) {
        throw std::invalid_argument("graph_edit_distance: kinds must cover every node");
    }
    const auto adj_a = adjacency_bits(a);
    const auto adj_b = adjacency_bits(b);
    const std::size_t n1 = a.node_count;
    const std::size_t n2 = b.node_count;

    std::vector<std::size_t> order(n1);
    for (std::size_t i = 0; i < n1; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return std::popcount(adj_a[x]) > std::popcount(adj_a[y]); });

    auto kind_a = [&](std::size_t i) { return labeled ? a.kinds[i] : 0; };
    auto kind_b = [&](std::size_t v) { return labeled ? b.kinds[v] : 0; };

    // G1 edges with an endpoint among order[depth..].
    std::vector<int> remaining_edges_a(n1 + 1, 0);
    {
        Mask processed = 0;
        for (std::size_t d = 0; d <= n1; ++d) {
            int count = 0;
            for (const auto& [u, v] : a.edges) {
                if (!((processed >> u) & 1U) || !((processed >> v) & 1U)) ++count;
            }
            remaining_edges_a[d] = count;
            if (d < n1) processed |= Mask{1} << order[d];
        }
    }
    std::vector<std::map<int, int>> remaining_kinds_a(n1 + 1);
    for (std::size_t d = 0; d < n1; ++d) {
        for (std::size_t k = d; k < n1; ++k) ++remaining_kinds_a[d][kind_a(order[k])];
    }

    auto heuristic = [&](std::size_t depth, Mask used) {
        const Mask free_mask = (n2 == 64 ? ~Mask{0} : ((Mask{1} << n2) - 1)) & ~used;
        const int free_count = std::popcount(free_mask);
        const int rest = static_cast<int>(n1 - depth);
        std::map<int, int> free_kinds;
        for (std::size_t v = 0; v < n2; ++v) {
            if ((free_mask >> v) & 1U) ++free_kinds[kind_b(v)];
        }
        int common = 0;
        for (const auto& [k, c] : remaining_kinds_a[depth]) {
            auto it = free_kinds.find(k);
            if (it != free_kinds.end()) common += std::min(c, it->second);
        }
        int node_bound = std::max(rest, free_count) - common;
        if (labeled && opt.relabel_cost < 1) node_bound = std::abs(rest - free_count);
        int e2 = 0;
        for (const auto& [u, v] : b.edges) {
            if (((free_mask >> u) & 1U) || ((free_mask >> v) & 1U)) ++e2;
        }
        return node_bound + std::abs(remaining_edges_a[depth] - e2);
    };

    std::vector<State> states;
    states.push_back({0, -1, 0, 0, 0});
    std::priority_queue<Entry, std::vector<Entry>, EntryOrder> open;
    open.push({heuristic(0, 0), 0, 0});
    std::vector<int> mapping(n1, -1);
    std::size_t expansions = 0;

    while (!open.empty()) {
        const Entry top = open.top();
        open.pop();
        const State s = states[top.id];
        if (s.depth == n1 + 1) return {s.cost, {}};
        if (++expansions > opt.expansion_budget) return {std::nullopt, "budget"};

        if (s.depth == n1) {
            int extra = 0;
            for (std::size_t v = 0; v < n2; ++v) {
                if (!((s.used >> v) & 1U)) ++extra;
            }
            for (const auto& [u, v] : b.edges) {
                if (!((s.used >> u) & 1U) || !((s.used >> v) & 1U)) ++extra;
            }
            states.push_back({top.id, -1, n1 + 1, s.used, s.cost + extra});
            open.push({s.cost + extra, n1 + 1, states.size() - 1});
            continue;
        }

        std::size_t walk = top.id;
        for (std::size_t d = s.depth; d > 0; --d) {
            mapping[order[d - 1]] = states[walk].target;
            walk = states[walk].parent;
        }
        const std::size_t i = order[s.depth];
        for (int target = -1; target < static_cast<int>(n2); ++target) {
            if (target >= 0 && ((s.used >> target) & 1U)) continue;
            int cost = s.cost;
            if (target < 0) {
                cost += 1;
            } else if (kind_a(i) != kind_b(static_cast<std::size_t>(target))) {
                cost += opt.relabel_cost;
            }
            for (std::size_t d = 0; d < s.depth; ++d) {
                const std::size_t j = order[d];
                const bool e1 = (adj_a[i] >> j) & 1U;
                const bool e2 = target >= 0 && mapping[j] >= 0 &&
                                ((adj_b[static_cast<std::size_t>(target)] >> mapping[j]) & 1U);
                if (e1 != e2) ++cost;
            }
            const Mask used = target >= 0 ? (s.used | (Mask{1} << target)) : s.used;
            states.push_back({top.id, target, s.depth + 1, used, cost});
            open.push({cost + heuristic(s.depth + 1, used), s.depth + 1, states.size() - 1});
        }
    }
    throw std::logic_error("graph_edit_distance: search exhausted without a goal");
}

PurityReport concept_purity(const std::vector<std::vector<graph::Subgraph>>& representatives, bool use_kinds,
                            const GedOptions& opt) {
    PurityReport report;
    for (std::size_t c = 0; c < representatives.size(); ++c) {
        ConceptPurity p;
        p.cluster = c;
        const auto& reps = representatives[c];
        if (reps.size() < 3) {
            p.skipped = "fewer than 3 members";
            report.concepts.push_back(p);
            continue;
        }
        const EditGraph top = EditGraph::from_subgraph(reps[0], use_kinds);
        const GedResult second = graph_edit_distance(top, EditGraph::from_subgraph(reps[1], use_kinds), opt);
        const GedResult third = graph_edit_distance(top, EditGraph::from_subgraph(reps[2], use_kinds), opt);
        p.ged_second = second.distance;
        p.ged_third = third.distance;
        if (!second.distance || !third.distance) {
            p.skipped = second.distance ? third.skipped : second.skipped;
            report.concepts.push_back(p);
            continue;
        }
        p.score = 0.5 * (*second.distance + *third.distance);
        const double pairwise = std::min(*second.distance, *third.distance);
        ++report.eligible;
        report.minimum = report.minimum ? std::min(*report.minimum, *p.score) : *p.score;
        report.minimum_pairwise = report.minimum_pairwise ? std::min(*report.minimum_pairwise, pairwise) : pairwise;
        report.concepts.push_back(p);
    }
    return report;
}

std::size_t ged_size_cap(const std::string& dataset) {
    if (dataset == "ba-shapes" || dataset == "ba-community") return 10;
    if (dataset == "tree-cycles") return 12;
    return 13;
}

}  // namespace cgn::metrics
