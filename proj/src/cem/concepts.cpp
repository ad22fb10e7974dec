#include "cgn/cem/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cgn::cem {

using diff::Matrix;
using diff::Var;

Var fuzzify(Var h, double eps) { return diff::normalize_by_row_max(diff::softmax_rows(h), eps); }

Matrix fuzzify(const Matrix& h, double eps) {
    diff::Tape tape;
    return fuzzify(tape.constant(h), eps).value();
}

BooleanConcept booleanize(const Matrix& q, double tau) {
    if (q.cols > 64) throw std::invalid_argument("booleanize: concept width above 64 is not supported");
    BooleanConcept r;
    r.width = q.cols;
    r.rows.assign(q.rows, 0);
    for (std::size_t i = 0; i < q.rows; ++i) {
        for (std::size_t u = 0; u < q.cols; ++u) {
            if (q(i, u) >= tau) r.rows[i] |= std::uint64_t{1} << u;
        }
    }
    return r;
}

std::string pattern_string(std::uint64_t pattern, std::size_t width) {
    std::string s(width, '0');
    for (std::size_t u = 0; u < width; ++u) {
        if ((pattern >> u) & 1U) s[u] = '1';
    }
    return s;
}

std::optional<std::size_t> ClusterTable::find(std::uint64_t pattern) const {
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        if (clusters[c].pattern == pattern) return c;
    }
    return std::nullopt;
}

ClusterTable assign_clusters(const BooleanConcept& r, const Matrix& q) {
    if (q.rows != r.size()) throw std::invalid_argument("assign_clusters: q and r row counts differ");
    std::map<std::uint64_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < r.size(); ++i) groups[r.rows[i]].push_back(i);

    ClusterTable table;
    table.width = r.width;
    for (auto& [pattern, members] : groups) {
        Cluster c;
        c.pattern = pattern;
        c.centroid.assign(q.cols, 0.0);
        for (std::size_t i : members) {
            for (std::size_t u = 0; u < q.cols; ++u) c.centroid[u] += q(i, u);
        }
        for (double& v : c.centroid) v /= static_cast<double>(members.size());
        c.rare = members.size() <= kRareClusterSize;
        c.members = std::move(members);
        table.clusters.push_back(std::move(c));
    }
    std::stable_sort(table.clusters.begin(), table.clusters.end(),
                     [](const Cluster& a, const Cluster& b) { return a.members.size() > b.members.size(); });
    table.assignment.assign(r.size(), 0);
    for (std::size_t c = 0; c < table.clusters.size(); ++c) {
        for (std::size_t i : table.clusters[c].members) table.assignment[i] = c;
    }
    return table;
}

Var pool_graph(Var q, std::span<const std::size_t> graph_indicator, std::size_t graph_count) {
    return diff::segment_mean(q, graph_indicator, graph_count);
}

std::vector<std::vector<Representative>> concept_representatives(const ClusterTable& table, const Matrix& q,
                                                                 const graph::LabeledGraph& g, std::size_t hops) {
    const auto adj = g.adjacency();
    std::vector<std::vector<Representative>> out;
    out.reserve(table.clusters.size());
    for (const Cluster& c : table.clusters) {
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(c.members.size());
        for (std::size_t i : c.members) {
            double d2 = 0.0;
            for (std::size_t u = 0; u < q.cols; ++u) {
                const double diffu = q(i, u) - c.centroid[u];
                d2 += diffu * diffu;
            }
            ranked.emplace_back(std::sqrt(d2), i);
        }
        std::sort(ranked.begin(), ranked.end());
        std::vector<Representative> reps(kRepresentativeCount);
        for (std::size_t k = 0; k < kRepresentativeCount && k < ranked.size(); ++k) {
            reps[k].node = ranked[k].second;
            reps[k].distance = ranked[k].first;
            reps[k].neighborhood = graph::khop_subgraph(g, adj, ranked[k].second, hops);
        }
        out.push_back(std::move(reps));
    }
    return out;
}

std::string concept_dot(const Cluster& cluster, std::size_t cluster_index, std::size_t width,
                        const std::vector<Representative>& reps) {
    std::ostringstream os;
    os << "graph concept_" << cluster_index << " {\n";
    os << "  label=\"concept " << cluster_index << " pattern " << pattern_string(cluster.pattern, width) << " size "
       << cluster.members.size() << (cluster.rare ? " (rare)" : "") << "\";\n";
    os << "  node [style=filled, shape=circle, label=\"\"];\n";
    for (std::size_t k = 0; k < reps.size(); ++k) {
        os << "  subgraph cluster_" << k << " {\n";
        if (reps[k].exhausted()) {
            os << "    label=\"exhausted\"; color=grey;\n";
            os << "    r" << k << "_empty [fillcolor=grey90, color=grey];\n";
        } else {
            const graph::Subgraph& s = *reps[k].neighborhood;
            os << "    label=\"node " << *reps[k].node << "\";\n";
            for (std::size_t v = 0; v < s.size(); ++v) {
                os << "    r" << k << "_" << v << " [fillcolor=" << (v == s.center ? "blue" : "orange") << "];\n";
            }
            for (const auto& [a, b] : s.edges) os << "    r" << k << "_" << a << " -- r" << k << "_" << b << ";\n";
        }
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace cgn::cem
