#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cgn/graph/synthetic.hpp"
#include "cgn/graph/tu_format.hpp"

using namespace cgn;
using namespace cgn::graph;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = CGN_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("cgn_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Independent distance oracle: repeated relaxation over the edge list.
std::vector<std::size_t> hop_distances(const LabeledGraph& g, std::size_t src) {
    const std::size_t inf = g.node_count + 1;
    std::vector<std::size_t> dist(g.node_count, inf);
    dist[src] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [u, v] : g.edges) {
            if (dist[u] + 1 < dist[v]) dist[v] = dist[u] + 1, changed = true;
            if (dist[v] + 1 < dist[u]) dist[u] = dist[v] + 1, changed = true;
        }
    }
    return dist;
}

std::size_t count_random_edges(const Dataset& d) {
    // Edges not explained by base generation, motif structure or attachment.
    std::size_t c = 0;
    for (const auto& a : d.annotations) c += a.attached_by_random_edge ? 1 : 0;
    return c;
}

}  // namespace

TEST_CASE("BA-Shapes: sizes, motif counts and edge budget") {
    Dataset d = generate_synthetic(default_spec("ba-shapes", 3));
    CHECK(d.graph.node_count == 700);
    CHECK(d.num_classes == 4);
    std::size_t in_motif = 0;
    std::set<std::size_t> motifs;
    for (const auto& a : d.annotations) {
        if (a.motif_id) {
            ++in_motif;
            motifs.insert(*a.motif_id);
        }
    }
    CHECK(in_motif == 400);
    CHECK(motifs.size() == 80);
    // (300-5)*5 BA edges + 80*(6 house + 1 attachment) + 70 random.
    CHECK(d.graph.edges.size() == 295 * 5 + 80 * 7 + 70);
    CHECK(count_random_edges(d) <= 140);
    CHECK(count_random_edges(d) > 0);
}

TEST_CASE("every house has one top, two middle and two bottom nodes") {
    Dataset d = generate_synthetic(default_spec("ba-shapes", 1));
    std::map<std::size_t, std::map<int, int>> per_motif;
    for (const auto& a : d.annotations) {
        if (a.motif_id) ++per_motif[*a.motif_id][a.role];
    }
    for (const auto& [id, roles] : per_motif) {
        CHECK(roles.at(1) == 1);
        CHECK(roles.at(2) == 2);
        CHECK(roles.at(3) == 2);
    }
    for (std::size_t i = 0; i < d.graph.node_count; ++i) CHECK(d.labels[i] == d.annotations[i].role);
}

TEST_CASE("Tree-Cycles: 735 nodes and cycle nodes have degree >= 2 inside their motif") {
    Dataset d = generate_synthetic(default_spec("tree-cycles", 5));
    CHECK(d.graph.node_count == 255 + 480);
    CHECK(d.graph.edges.size() == 254 + 80 * 7 + 70);
    std::vector<int> inner_degree(d.graph.node_count, 0);
    for (const auto& [u, v] : d.graph.edges) {
        const auto& a = d.annotations[u];
        const auto& b = d.annotations[v];
        if (a.motif_id && b.motif_id && *a.motif_id == *b.motif_id) {
            ++inner_degree[u];
            ++inner_degree[v];
        }
    }
    for (std::size_t i = 0; i < d.graph.node_count; ++i) {
        if (d.annotations[i].motif_id) CHECK(inner_degree[i] >= 2);
    }
}

TEST_CASE("BA-Community doubles BA-Shapes with eight role classes") {
    Dataset shapes = generate_synthetic(default_spec("ba-shapes", 0));
    Dataset comm = generate_synthetic(default_spec("ba-community", 0));
    CHECK(comm.graph.node_count == 2 * shapes.graph.node_count);
    CHECK(comm.num_classes == 8);
    std::set<int> labels(comm.labels.begin(), comm.labels.end());
    CHECK(labels.size() == 8);
    CHECK(comm.graph.features.cols == 10);
}

TEST_CASE("grid datasets use 3x3 grids") {
    Dataset bg = generate_synthetic(default_spec("ba-grid", 2));
    CHECK(bg.graph.node_count == 300 + 80 * 9);
    Dataset tg = generate_synthetic(default_spec("tree-grid", 2));
    CHECK(tg.graph.node_count == 255 + 80 * 9);
    CHECK(tg.graph.edges.size() == 254 + 80 * (12 + 1) + 70);
}

TEST_CASE("generators are deterministic and reject unknown ids") {
    Dataset a = generate_synthetic(default_spec("ba-grid", 9));
    Dataset b = generate_synthetic(default_spec("ba-grid", 9));
    CHECK(a.graph.edges == b.graph.edges);
    CHECK(a.labels == b.labels);
    Dataset c = generate_synthetic(default_spec("ba-grid", 10));
    CHECK(a.graph.edges != c.graph.edges);
    CHECK_THROWS_AS(default_spec("ba-hexagons"), std::invalid_argument);
}

TEST_CASE("TU loader: fixture with a triangle and a path") {
    Dataset d = load_tu_dataset(kFixtures / "tiny");
    CHECK(d.task == TaskKind::Graph);
    CHECK(d.graph_count() == 2);
    CHECK(d.member(0).edges.size() == 3);
    CHECK(d.member(1).edges.size() == 2);
    CHECK(d.graph.edges.front() == Edge{0, 1});
    CHECK(d.labels == std::vector<int>{1, 0});
    CHECK(d.num_classes == 2);
    CHECK(d.graph.features.cols == 3);
    CHECK(d.graph.features(3, 2) == 1.0);
}

TEST_CASE("TU export round-trips the fixture bit-exactly") {
    Dataset d = load_tu_dataset(kFixtures / "tiny");
    fs::path out = scratch_dir("roundtrip");
    export_tu_dataset(d, out, "TINY");
    for (const char* suffix : {"_A.txt", "_graph_indicator.txt", "_graph_labels.txt", "_node_labels.txt"}) {
        CAPTURE(suffix);
        CHECK(slurp(out / (std::string("TINY") + suffix)) == slurp(kFixtures / "tiny" / (std::string("TINY") + suffix)));
    }
    Dataset again = load_tu_dataset(out);
    CHECK(again.graph.edges == d.graph.edges);
    CHECK(again.labels == d.labels);
}

TEST_CASE("TU loader errors carry file and line") {
    fs::path dir = scratch_dir("bad");
    for (const auto& entry : fs::directory_iterator(kFixtures / "tiny")) fs::copy(entry.path(), dir / entry.path().filename());

    SUBCASE("non-integer token") {
        std::ofstream(dir / "TINY_A.txt") << "1, 2\n2, x\n";
        try {
            load_tu_dataset(dir);
            FAIL("expected TuFormatError");
        } catch (const TuFormatError& e) {
            CHECK(std::string(e.what()).find("TINY_A.txt:2") != std::string::npos);
        }
    }
    SUBCASE("edge across graphs") {
        std::ofstream(dir / "TINY_A.txt") << "1, 2\n3, 4\n";
        try {
            load_tu_dataset(dir);
            FAIL("expected TuFormatError");
        } catch (const TuFormatError& e) {
            CHECK(std::string(e.what()).find(":2: edge references a node outside its graph") != std::string::npos);
        }
    }
    SUBCASE("missing mandatory file") {
        fs::remove(dir / "TINY_graph_labels.txt");
        CHECK_THROWS_AS(load_tu_dataset(dir), TuFormatError);
    }
    SUBCASE("node labels are optional") {
        fs::remove(dir / "TINY_node_labels.txt");
        Dataset d = load_tu_dataset(dir);
        CHECK(d.graph.features.cols == 1);
        CHECK(d.graph.features(4, 0) == 1.0);
    }
}

TEST_CASE("synthetic export writes the roles sidecar") {
    Dataset d = generate_synthetic(default_spec("ba-shapes", 0));
    fs::path out = scratch_dir("synthetic_export");
    export_tu_dataset(d, out, "BA");
    std::ifstream roles(out / "BA_roles.txt");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(roles, line)) ++lines;
    CHECK(lines == 700);
    Dataset back = load_tu_dataset(out);
    CHECK(back.graph.edges == d.graph.edges);
}

TEST_CASE("khop_subgraph: base cases") {
    LabeledGraph path;
    path.node_count = 3;
    path.edges = {{0, 1}, {1, 2}};
    path.features = diff::Matrix(3, 1, 1.0);
    Subgraph s0 = khop_subgraph(path, 1, 0);
    CHECK(s0.nodes == std::vector<std::size_t>{1});
    CHECK(s0.edges.empty());
    Subgraph s1 = khop_subgraph(path, 0, 1);
    CHECK(s1.nodes == std::vector<std::size_t>{0, 1});
    CHECK(s1.edges.size() == 1);
    CHECK(s1.center == 0);
}

TEST_CASE("khop_subgraph equals the breadth-first ball and covers houses at p=2") {
    Dataset d = generate_synthetic(default_spec("ba-shapes", 4));
    const auto adj = d.graph.adjacency();
    Rng rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t node = rng.below(d.graph.node_count);
        const std::size_t p = rng.below(4);
        Subgraph s = khop_subgraph(d.graph, adj, node, p);
        const auto dist = hop_distances(d.graph, node);
        std::set<std::size_t> ball;
        for (std::size_t v = 0; v < d.graph.node_count; ++v) {
            if (dist[v] <= p) ball.insert(v);
        }
        CHECK(std::set<std::size_t>(s.nodes.begin(), s.nodes.end()) == ball);
        std::size_t induced = 0;
        for (const auto& [u, v] : d.graph.edges) induced += (ball.contains(u) && ball.contains(v)) ? 1 : 0;
        CHECK(s.edges.size() == induced);
    }
    for (std::size_t v = 0; v < d.graph.node_count; ++v) {
        if (!d.annotations[v].motif_id) continue;
        Subgraph s = khop_subgraph(d.graph, adj, v, 2);
        std::set<std::size_t> nodes(s.nodes.begin(), s.nodes.end());
        for (std::size_t w = 0; w < d.graph.node_count; ++w) {
            if (d.annotations[w].motif_id == d.annotations[v].motif_id) CHECK(nodes.contains(w));
        }
    }
}

TEST_CASE("make_split: sizes, determinism and stratification") {
    Dataset d = generate_synthetic(default_spec("ba-shapes", 0));
    Split s = make_split(d.labels, 0.8, 42);
    std::size_t train = 0;
    for (std::size_t i = 0; i < s.train.size(); ++i) {
        CHECK(s.train[i] != s.test[i]);
        train += s.train[i] ? 1 : 0;
    }
    CHECK(train >= 558);
    CHECK(train <= 562);

    Split again = make_split(d.labels, 0.8, 42);
    CHECK(again.train == s.train);
    Split other = make_split(d.labels, 0.8, 19);
    CHECK(other.train != s.train);

    std::map<int, std::pair<int, int>> counts;
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        auto& c = counts[d.labels[i]];
        ++c.second;
        c.first += s.train[i] ? 1 : 0;
    }
    for (const auto& [label, c] : counts) {
        CHECK(std::abs(static_cast<double>(c.first) / c.second - 0.8) <= 0.02);
    }

    CHECK_THROWS_AS(make_split(d.labels, 1.0, 1), std::invalid_argument);
    std::vector<int> lonely{0, 0, 0, 0, 1};
    Split f = make_split(lonely, 0.6, 1);
    CHECK(std::count(f.train.begin(), f.train.end(), true) == 3);
}
