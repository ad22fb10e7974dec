#include "cgn/graph/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "cgn/diff/rng.hpp"

namespace cgn::graph {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& token, const fs::path& file, std::size_t line) {
    const std::string t = trim(token);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw TuFormatError(file.filename().string() + ":" + std::to_string(line) + ": non-integer token '" + t + "'");
    }
    return value;
}

// One integer per nonblank line.
std::vector<long long> read_column(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw TuFormatError("cannot open " + file.string());
    std::vector<long long> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        out.push_back(parse_int(line, file, lineno));
    }
    return out;
}

fs::path required(const fs::path& dir, const std::string& prefix, const std::string& suffix) {
    fs::path p = dir / (prefix + suffix);
    if (!fs::exists(p)) throw TuFormatError("missing mandatory file " + p.string());
    return p;
}

std::string infer_prefix(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw TuFormatError("not a directory: " + dir.string());
    std::vector<std::string> candidates;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 6 && name.ends_with("_A.txt")) candidates.push_back(name.substr(0, name.size() - 6));
    }
    if (candidates.empty()) throw TuFormatError("missing mandatory file *_A.txt in " + dir.string());
    std::sort(candidates.begin(), candidates.end());
    return candidates.front();
}

}  // namespace

Dataset load_tu_dataset(const fs::path& dir) {
    const std::string prefix = infer_prefix(dir);
    const fs::path a_file = required(dir, prefix, "_A.txt");
    const fs::path gi_file = required(dir, prefix, "_graph_indicator.txt");
    const fs::path gl_file = required(dir, prefix, "_graph_labels.txt");
    const fs::path nl_file = dir / (prefix + "_node_labels.txt");

    Dataset d;
    d.name = prefix;
    d.task = TaskKind::Graph;

    const auto indicator = read_column(gi_file);
    const auto graph_labels = read_column(gl_file);
    const std::size_t n = indicator.size();
    const std::size_t t = graph_labels.size();
    d.graph_indicator.resize(n);
    d.graph_offsets.assign(t + 1, 0);
    {
        long long prev = 1;
        for (std::size_t i = 0; i < n; ++i) {
            const long long g = indicator[i];
            if (g < 1 || static_cast<std::size_t>(g) > t) {
                throw TuFormatError(gi_file.filename().string() + ":" + std::to_string(i + 1) + ": graph id " +
                                    std::to_string(g) + " outside 1.." + std::to_string(t));
            }
            if (g < prev) {
                throw TuFormatError(gi_file.filename().string() + ":" + std::to_string(i + 1) +
                                    ": graph ids must be nondecreasing");
            }
            prev = g;
            d.graph_indicator[i] = static_cast<std::size_t>(g - 1);
            ++d.graph_offsets[static_cast<std::size_t>(g)];
        }
        for (std::size_t g = 0; g < t; ++g) {
            if (d.graph_offsets[g + 1] == 0) throw TuFormatError("graph " + std::to_string(g + 1) + " has no nodes");
            d.graph_offsets[g + 1] += d.graph_offsets[g];
        }
    }

    std::set<long long> distinct_graph_labels(graph_labels.begin(), graph_labels.end());
    d.graph_label_values.assign(distinct_graph_labels.begin(), distinct_graph_labels.end());
    for (long long v : graph_labels) {
        d.labels.push_back(static_cast<int>(std::lower_bound(d.graph_label_values.begin(), d.graph_label_values.end(),
                                                             static_cast<int>(v)) -
                                            d.graph_label_values.begin()));
    }
    d.num_classes = d.graph_label_values.size();

    d.graph.node_count = n;
    {
        std::ifstream in(a_file);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
                throw TuFormatError(a_file.filename().string() + ":" + std::to_string(lineno) +
                                    ": expected 'src, dst'");
            }
            const long long u = parse_int(line.substr(0, comma), a_file, lineno);
            const long long v = parse_int(line.substr(comma + 1), a_file, lineno);
            if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n || static_cast<std::size_t>(v) > n) {
                throw TuFormatError(a_file.filename().string() + ":" + std::to_string(lineno) + ": node id outside 1.." +
                                    std::to_string(n));
            }
            const auto a = static_cast<std::size_t>(u - 1), b = static_cast<std::size_t>(v - 1);
            if (d.graph_indicator[a] != d.graph_indicator[b]) {
                throw TuFormatError(a_file.filename().string() + ":" + std::to_string(lineno) +
                                    ": edge references a node outside its graph");
            }
            if (a != b) d.graph.edges.emplace_back(a, b);
        }
    }

    if (fs::exists(nl_file)) {
        const auto kinds = read_column(nl_file);
        if (kinds.size() != n) {
            throw TuFormatError(nl_file.filename().string() + ": " + std::to_string(kinds.size()) +
                                " node labels for " + std::to_string(n) + " nodes");
        }
        std::set<long long> distinct(kinds.begin(), kinds.end());
        d.node_kind_values.assign(distinct.begin(), distinct.end());
        d.graph.features = diff::Matrix(n, d.node_kind_values.size());
        for (std::size_t i = 0; i < n; ++i) {
            const int k = static_cast<int>(kinds[i]);
            d.graph.node_kinds.push_back(k);
            const auto slot = static_cast<std::size_t>(
                std::lower_bound(d.node_kind_values.begin(), d.node_kind_values.end(), k) - d.node_kind_values.begin());
            d.graph.features(i, slot) = 1.0;
        }
    } else {
        d.graph.features = diff::Matrix(n, 1, 1.0);
    }
    d.graph.normalize();
    return d;
}

void export_tu_dataset(const Dataset& d, const fs::path& dir, const std::string& prefix) {
    fs::create_directories(dir);
    auto open = [&](const std::string& suffix) {
        std::ofstream out(dir / (prefix + suffix));
        if (!out) throw std::runtime_error("cannot write " + (dir / (prefix + suffix)).string());
        return out;
    };
    const auto adj = d.graph.adjacency();
    {
        auto out = open("_A.txt");
        for (std::size_t u = 0; u < adj.size(); ++u) {
            for (std::size_t v : adj[u]) out << (u + 1) << ", " << (v + 1) << '\n';
        }
    }
    {
        auto out = open("_graph_indicator.txt");
        for (std::size_t i = 0; i < d.graph.node_count; ++i) {
            out << (d.task == TaskKind::Graph ? d.graph_indicator[i] + 1 : 1) << '\n';
        }
    }
    {
        auto out = open("_graph_labels.txt");
        if (d.task == TaskKind::Graph) {
            for (int y : d.labels) {
                out << (d.graph_label_values.empty() ? y : d.graph_label_values.at(static_cast<std::size_t>(y))) << '\n';
            }
        } else {
            out << 0 << '\n';
        }
    }
    if (d.task == TaskKind::Node) {
        auto out = open("_node_labels.txt");
        for (int y : d.labels) out << y << '\n';
    } else if (!d.graph.node_kinds.empty()) {
        auto out = open("_node_labels.txt");
        for (int k : d.graph.node_kinds) out << k << '\n';
    }
    if (!d.annotations.empty()) {
        auto out = open("_roles.txt");
        for (const auto& a : d.annotations) out << a.role << '\n';
    }
}

Dataset subsample_graphs(const Dataset& d, std::size_t count, std::uint64_t seed) {
    if (d.task != TaskKind::Graph) throw std::invalid_argument("subsample_graphs: graph-task dataset required");
    if (count >= d.graph_count()) return d;
    std::vector<std::size_t> ids(d.graph_count());
    for (std::size_t g = 0; g < ids.size(); ++g) ids[g] = g;
    Rng rng(seed);
    rng.shuffle(ids);
    ids.resize(count);
    std::sort(ids.begin(), ids.end());

    Dataset out;
    out.name = d.name;
    out.task = TaskKind::Graph;
    out.num_classes = d.num_classes;
    out.graph_label_values = d.graph_label_values;
    out.node_kind_values = d.node_kind_values;
    out.graph_offsets.push_back(0);
    std::vector<std::vector<double>> feats;
    const std::size_t dims = d.graph.features.cols;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const std::size_t g = ids[k];
        const std::size_t base = out.graph.node_count;
        const LabeledGraph m = d.member(g);
        for (const auto& [u, v] : m.edges) out.graph.edges.emplace_back(base + u, base + v);
        for (std::size_t i = 0; i < m.node_count; ++i) {
            out.graph_indicator.push_back(k);
            feats.emplace_back(m.features.row(i).begin(), m.features.row(i).end());
        }
        out.graph.node_kinds.insert(out.graph.node_kinds.end(), m.node_kinds.begin(), m.node_kinds.end());
        out.graph.node_count += m.node_count;
        out.graph_offsets.push_back(out.graph.node_count);
        out.labels.push_back(d.labels[g]);
    }
    out.graph.features = diff::Matrix(out.graph.node_count, dims);
    for (std::size_t i = 0; i < feats.size(); ++i) {
        for (std::size_t j = 0; j < dims; ++j) out.graph.features(i, j) = feats[i][j];
    }
    out.graph.normalize();
    return out;
}

}  // namespace cgn::graph
