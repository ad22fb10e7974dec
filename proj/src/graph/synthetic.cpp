#include "cgn/graph/synthetic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cgn::graph {

namespace {

struct Motif {
    std::size_t size;
    std::vector<Edge> edges;
    std::vector<int> roles;  // class label per motif node
};

// Roof apex is node 4; nodes 0,1 are the upper square corners adjacent to it.
Motif house() { return {5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 0}, {4, 1}}, {2, 2, 3, 3, 1}}; }

Motif cycle6() {
    Motif m{6, {}, std::vector<int>(6, 1)};
    for (std::size_t i = 0; i < 6; ++i) m.edges.emplace_back(i, (i + 1) % 6);
    return m;
}

Motif grid3() {
    Motif m{9, {}, std::vector<int>(9, 1)};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t v = r * 3 + c;
            if (c + 1 < 3) m.edges.emplace_back(v, v + 1);
            if (r + 1 < 3) m.edges.emplace_back(v, v + 3);
        }
    }
    return m;
}

struct Builder {
    std::size_t n = 0;
    std::set<Edge> edges;
    std::vector<int> labels;
    std::vector<MotifAnnotation> ann;

    bool has(std::size_t u, std::size_t v) const { return edges.contains({std::min(u, v), std::max(u, v)}); }
    void add(std::size_t u, std::size_t v) { edges.insert({std::min(u, v), std::max(u, v)}); }

    void add_base(const std::vector<Edge>& base, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            labels.push_back(0);
            ann.push_back({0, std::nullopt, false});
        }
        for (const auto& [u, v] : base) add(n + u, n + v);
        n += count;
    }

    // Attaches motif copies to uniformly chosen nodes of [base_lo, base_hi).
    void attach_motifs(const Motif& m, std::size_t count, std::size_t base_lo, std::size_t base_hi, int label_offset,
                       std::size_t& motif_counter, Rng& rng) {
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t start = n;
            for (std::size_t i = 0; i < m.size; ++i) {
                labels.push_back(m.roles[i] + label_offset);
                ann.push_back({m.roles[i] + label_offset, motif_counter, false});
            }
            n += m.size;
            for (const auto& [u, v] : m.edges) add(start + u, start + v);
            add(start, base_lo + rng.below(base_hi - base_lo));
            ++motif_counter;
        }
    }

    // Adds `count` edges drawn uniformly over non-adjacent pairs with u in
    // [lo_a, hi_a) and v in [lo_b, hi_b).
    void random_edges(std::size_t count, std::size_t lo_a, std::size_t hi_a, std::size_t lo_b, std::size_t hi_b,
                      Rng& rng) {
        std::size_t added = 0;
        while (added < count) {
            const std::size_t u = lo_a + rng.below(hi_a - lo_a);
            const std::size_t v = lo_b + rng.below(hi_b - lo_b);
            if (u == v || has(u, v)) continue;
            add(u, v);
            ann[u].attached_by_random_edge = true;
            ann[v].attached_by_random_edge = true;
            ++added;
        }
    }
};

}  // namespace

std::vector<Edge> barabasi_albert(std::size_t n, std::size_t m, Rng& rng) {
    if (m < 1 || m >= n) throw std::invalid_argument("barabasi_albert: need 1 <= m < n");
    std::vector<Edge> edges;
    std::vector<std::size_t> targets(m);
    for (std::size_t i = 0; i < m; ++i) targets[i] = i;
    std::vector<std::size_t> repeated;
    for (std::size_t source = m; source < n; ++source) {
        for (std::size_t t : targets) edges.emplace_back(std::min(source, t), std::max(source, t));
        repeated.insert(repeated.end(), targets.begin(), targets.end());
        repeated.insert(repeated.end(), m, source);
        std::set<std::size_t> chosen;
        while (chosen.size() < m) chosen.insert(repeated[rng.below(repeated.size())]);
        targets.assign(chosen.begin(), chosen.end());
    }
    return edges;
}

std::vector<Edge> binary_tree(std::size_t levels) {
    const std::size_t n = (std::size_t{1} << levels) - 1;
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i) edges.emplace_back((i - 1) / 2, i);
    return edges;
}

SyntheticKind parse_synthetic_kind(const std::string& id) {
    if (id == "ba-shapes") return SyntheticKind::BaShapes;
    if (id == "ba-community") return SyntheticKind::BaCommunity;
    if (id == "ba-grid") return SyntheticKind::BaGrid;
    if (id == "tree-cycles") return SyntheticKind::TreeCycles;
    if (id == "tree-grid") return SyntheticKind::TreeGrid;
    throw std::invalid_argument("unknown synthetic dataset id '" + id + "'");
}

bool is_synthetic_id(const std::string& id) {
    return id == "ba-shapes" || id == "ba-community" || id == "ba-grid" || id == "tree-cycles" || id == "tree-grid";
}

std::string to_string(SyntheticKind kind) {
    switch (kind) {
        case SyntheticKind::BaShapes: return "ba-shapes";
        case SyntheticKind::BaCommunity: return "ba-community";
        case SyntheticKind::BaGrid: return "ba-grid";
        case SyntheticKind::TreeCycles: return "tree-cycles";
        case SyntheticKind::TreeGrid: return "tree-grid";
    }
    return "unknown";
}

DatasetSpec default_spec(const std::string& id, std::uint64_t seed) {
    DatasetSpec s;
    s.kind = parse_synthetic_kind(id);
    s.seed = seed;
    if (s.kind == SyntheticKind::TreeCycles || s.kind == SyntheticKind::TreeGrid) s.base_size = 8;
    if (s.kind != SyntheticKind::BaCommunity) s.bridge_edges = 0;
    return s;
}

Dataset generate_synthetic(const DatasetSpec& spec) {
    if (spec.motif_count == 0) throw std::invalid_argument("generate_synthetic: motif count must be positive");
    Rng rng(spec.seed);
    Builder b;
    std::size_t motif_counter = 0;
    Dataset d;
    d.name = to_string(spec.kind);
    d.task = TaskKind::Node;

    auto ba_with = [&](const Motif& m, int label_offset) {
        const std::size_t lo = b.n;
        b.add_base(barabasi_albert(spec.base_size, spec.attachment_degree, rng), spec.base_size);
        for (std::size_t i = lo; i < b.n; ++i) {
            b.labels[i] = label_offset;
            b.ann[i].role = label_offset;
        }
        b.attach_motifs(m, spec.motif_count, lo, lo + spec.base_size, label_offset, motif_counter, rng);
        const std::size_t hi = b.n;
        b.random_edges(spec.random_edges, lo, hi, lo, hi, rng);
        return std::pair{lo, lo + spec.base_size};
    };
    auto tree_with = [&](const Motif& m) {
        const std::size_t base_n = (std::size_t{1} << spec.base_size) - 1;
        b.add_base(binary_tree(spec.base_size), base_n);
        b.attach_motifs(m, spec.motif_count, 0, base_n, 0, motif_counter, rng);
        b.random_edges(spec.random_edges, 0, b.n, 0, b.n, rng);
    };

    switch (spec.kind) {
        case SyntheticKind::BaShapes:
            ba_with(house(), 0);
            d.num_classes = 4;
            break;
        case SyntheticKind::BaCommunity: {
            const auto first = ba_with(house(), 0);
            const auto second = ba_with(house(), 4);
            b.random_edges(spec.bridge_edges, first.first, first.second, second.first, second.second, rng);
            d.num_classes = 8;
            break;
        }
        case SyntheticKind::BaGrid:
            ba_with(grid3(), 0);
            d.num_classes = 2;
            break;
        case SyntheticKind::TreeCycles:
            tree_with(cycle6());
            d.num_classes = 2;
            break;
        case SyntheticKind::TreeGrid:
            tree_with(grid3());
            d.num_classes = 2;
            break;
    }

    d.graph.node_count = b.n;
    d.graph.edges.assign(b.edges.begin(), b.edges.end());
    if (spec.kind == SyntheticKind::BaCommunity) {
        // Community-specific Gaussian features: mean +0.5 / -0.5, unit variance.
        constexpr std::size_t dims = 10;
        d.graph.features = diff::Matrix(b.n, dims);
        for (std::size_t i = 0; i < b.n; ++i) {
            const double mean = b.labels[i] < 4 ? 0.5 : -0.5;
            for (std::size_t j = 0; j < dims; ++j) d.graph.features(i, j) = mean + rng.normal();
        }
    } else {
        d.graph.features = diff::Matrix(b.n, 1, 1.0);
    }
    d.graph.normalize();
    d.labels = std::move(b.labels);
    d.annotations = std::move(b.ann);
    return d;
}

}  // namespace cgn::graph
