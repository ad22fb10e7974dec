#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cgn/cem/concepts.hpp"
#include "cgn/graph/synthetic.hpp"
#include "fd_oracle.hpp"

using namespace cgn;
using namespace cgn::diff;
using namespace cgn::cem;
using cgn::testing::check_gradients;
using cgn::testing::random_matrix;

namespace {

std::size_t argmax_row(const Matrix& m, std::size_t i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < m.cols; ++j) {
        if (m(i, j) > m(i, best)) best = j;
    }
    return best;
}

}  // namespace

TEST_CASE("fuzzify: worked examples") {
    Tape t;
    Matrix q = fuzzify(t.constant(Matrix::from_rows({{-1.2, 2.3}, {0.0, 0.0}}))).value();
    CHECK(q(0, 0) == doctest::Approx(0.0293 / 0.9707).epsilon(2e-3));
    CHECK(q(0, 0) == doctest::Approx(0.0302).epsilon(2e-3));
    CHECK(q(0, 1) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(q(1, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(q(1, 1) == doctest::Approx(1.0).epsilon(1e-5));

    const Matrix direct = fuzzify(Matrix::from_rows({{-1.2, 2.3}, {0.0, 0.0}}));
    CHECK(direct.data == q.data);
}

TEST_CASE("fuzzify: first stage matches the plain softmax") {
    const double e0 = std::exp(-1.2);
    const double e1 = std::exp(2.3);
    const double p0 = e0 / (e0 + e1);
    CHECK(p0 == doctest::Approx(0.0293).epsilon(2e-3));
    const Matrix q = fuzzify(Matrix::from_rows({{-1.2, 2.3}}), 1e-6);
    CHECK(q(0, 0) == doctest::Approx(p0 / ((1.0 - p0) + 1e-6)).epsilon(1e-12));
}

TEST_CASE("fuzzify: gradient matches finite differences") {
    Rng rng(3);
    auto f = [](Tape& t, const std::vector<Var>& v) {
        return sum(mul(fuzzify(v[0]), t.constant(Matrix::from_rows({{1, -2, 3}, {0.5, 2, -1}, {1, 1, 1}, {2, 0, -3}}))));
    };
    CHECK(check_gradients(f, {random_matrix(4, 3, rng, -2.0, 2.0)}).max_rel_error < 1e-5);
}

TEST_CASE("booleanize: threshold is closed") {
    const Matrix q = Matrix::from_rows({{0.0302, 1.0}, {0.5, 0.5}, {1.0, 0.6703}, {0.4999, 1.0}});
    const BooleanConcept r = booleanize(q);
    CHECK(r.width == 2);
    CHECK(pattern_string(r.rows[0], 2) == "01");
    CHECK(pattern_string(r.rows[1], 2) == "11");
    CHECK(pattern_string(r.rows[2], 2) == "11");
    CHECK(r.bit(3, 0) == false);
    CHECK(r.bit(3, 1) == true);
}

TEST_CASE("booleanize: second worked row under the full normalization") {
    const Matrix q = fuzzify(Matrix::from_rows({{2.2, 1.8}}));
    CHECK(q(0, 1) == doctest::Approx(0.6703).epsilon(1e-3));
    CHECK(booleanize(q).rows[0] == 0b11);
}

TEST_CASE("fuzzy algebra on random rows: argmax, nonzero patterns, cluster bound") {
    Rng rng(2024);
    const std::size_t n = 10000;
    const std::size_t m = 6;
    const Matrix h = random_matrix(n, m, rng, -5.0, 5.0);
    const Matrix q = fuzzify(h);
    const BooleanConcept r = booleanize(q);
    for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(argmax_row(q, i) == argmax_row(h, i));
        REQUIRE(r.rows[i] != 0);
    }
    const ClusterTable table = assign_clusters(r, q);
    CHECK(table.clusters.size() <= std::min<std::size_t>(n, std::size_t{1} << m));
    const ClusterTable again = assign_clusters(r, q);
    CHECK(again.assignment == table.assignment);
}

TEST_CASE("assign_clusters: identical rows share a cluster with their mean as centroid") {
    const Matrix q = Matrix::from_rows({{0.9, 0.2}, {0.7, 0.4}, {0.1, 1.0}});
    const ClusterTable t = assign_clusters(booleanize(q), q);
    REQUIRE(t.clusters.size() == 2);
    CHECK(t.clusters[0].pattern == 0b01);
    CHECK(t.clusters[0].members == std::vector<std::size_t>{0, 1});
    CHECK(t.clusters[0].centroid[0] == doctest::Approx(0.8));
    CHECK(t.clusters[0].centroid[1] == doctest::Approx(0.3));
    CHECK(t.clusters[1].members == std::vector<std::size_t>{2});
    CHECK(t.clusters[1].rare);
    CHECK(t.assignment == std::vector<std::size_t>{0, 0, 1});
    CHECK(t.find(0b10) == 1);
    CHECK_FALSE(t.find(0b11).has_value());
}

TEST_CASE("assign_clusters: every pattern present gives 2^m clusters") {
    const std::size_t m = 3;
    Matrix q(8, m);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t u = 0; u < m; ++u) q(i, u) = ((i >> u) & 1U) ? 1.0 : 0.1;
    }
    const ClusterTable t = assign_clusters(booleanize(q), q);
    CHECK(t.clusters.size() == 8);
    std::set<std::uint64_t> patterns;
    for (const auto& c : t.clusters) patterns.insert(c.pattern);
    CHECK(patterns.size() == 8);
}

TEST_CASE("assign_clusters: rare flag covers clusters of at most three members") {
    Matrix q(7, 2);
    for (std::size_t i = 0; i < 4; ++i) q(i, 0) = 1.0;
    for (std::size_t i = 4; i < 7; ++i) q(i, 1) = 1.0;
    const ClusterTable t = assign_clusters(booleanize(q), q);
    REQUIRE(t.clusters.size() == 2);
    CHECK(t.clusters[0].members.size() == 4);
    CHECK_FALSE(t.clusters[0].rare);
    CHECK(t.clusters[1].rare);
}

TEST_CASE("pool_graph: means per graph and passes gradients") {
    Tape t;
    const std::vector<std::size_t> one{0, 0};
    const Matrix pooled = pool_graph(t.constant(Matrix::from_rows({{0, 1}, {1, 1}})), one, 1).value();
    CHECK(pooled(0, 0) == 0.5);
    CHECK(pooled(0, 1) == 1.0);

    const std::vector<std::size_t> ident{0, 1, 2};
    const Matrix x = Matrix::from_rows({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
    CHECK(pool_graph(t.constant(x), ident, 3).value().data == x.data);

    Rng rng(5);
    const std::vector<std::size_t> seg{0, 0, 1, 1, 1};
    auto f = [&](Tape& tp, const std::vector<Var>& v) {
        return sum(mul(pool_graph(fuzzify(v[0]), seg, 2), tp.constant(Matrix::from_rows({{1, -1, 2}, {3, 0.5, -2}}))));
    };
    CHECK(check_gradients(f, {random_matrix(5, 3, rng)}).max_rel_error < 1e-5);
    const std::vector<std::size_t> gap{0, 2};
    CHECK_THROWS_AS(pool_graph(t.constant(Matrix(2, 2)), gap, 3), std::invalid_argument);
}

TEST_CASE("representatives: nearest to centroid first, padded with exhausted slots") {
    graph::LabeledGraph g;
    g.node_count = 6;
    g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}};
    g.features = Matrix(6, 1);
    g.normalize();
    const Matrix q = Matrix::from_rows({{1.0, 0.125}, {1.0, 0.375}, {1.0, 0.25}, {0.25, 1.0}, {1.0, 0.3125}, {1.0, 0.1875}});
    const ClusterTable t = assign_clusters(booleanize(q), q);
    const auto reps = concept_representatives(t, q, g, 1);
    REQUIRE(reps.size() == 2);
    REQUIRE(reps[0].size() == kRepresentativeCount);
    CHECK(*reps[0][0].node == 2);
    CHECK(reps[0][0].distance == doctest::Approx(0.0));
    CHECK(*reps[0][1].node == 4);
    CHECK(*reps[0][2].node == 5);
    CHECK(reps[0][0].neighborhood->nodes == std::vector<std::size_t>{2, 1, 3});

    CHECK(*reps[1][0].node == 3);
    for (std::size_t k = 1; k < kRepresentativeCount; ++k) CHECK(reps[1][k].exhausted());
}

TEST_CASE("representatives: equal distances fall back to node order") {
    graph::LabeledGraph g;
    g.node_count = 3;
    g.features = Matrix(3, 1);
    g.normalize();
    const Matrix q = Matrix::from_rows({{1.0, 0.125}, {1.0, 0.375}, {1.0, 0.25}});
    const auto reps = concept_representatives(assign_clusters(booleanize(q), q), q, g, 2);
    CHECK(*reps[0][0].node == 2);
    CHECK(*reps[0][1].node == 0);
    CHECK(*reps[0][2].node == 1);
}

TEST_CASE("representatives: house motif neighborhood at two hops holds the whole house") {
    const graph::Dataset d = graph::generate_synthetic(graph::default_spec("ba-shapes", 0));
    std::size_t house_node = SIZE_MAX;
    for (std::size_t i = 0; i < d.annotations.size(); ++i) {
        if (d.annotations[i].motif_id && d.annotations[i].role == 2) {
            house_node = i;
            break;
        }
    }
    REQUIRE(house_node != SIZE_MAX);
    const auto motif = *d.annotations[house_node].motif_id;
    const graph::Subgraph s = graph::khop_subgraph(d.graph, house_node, 2);
    std::size_t in_house = 0;
    for (std::size_t v : s.nodes) {
        if (d.annotations[v].motif_id == motif) ++in_house;
    }
    CHECK(in_house == 5);
}

TEST_CASE("concept_dot: colors the center, its neighbors and exhausted slots") {
    graph::LabeledGraph g;
    g.node_count = 3;
    g.edges = {{0, 1}, {1, 2}};
    g.features = Matrix(3, 1);
    g.normalize();
    const Matrix q = Matrix::from_rows({{1.0, 0.1}, {0.1, 1.0}, {0.1, 1.0}});
    const ClusterTable t = assign_clusters(booleanize(q), q);
    const auto reps = concept_representatives(t, q, g, 1);
    const std::string dot = concept_dot(t.clusters[0], 0, 2, reps[0]);
    CHECK(dot.rfind("graph concept_0 {", 0) == 0);
    CHECK(dot.find("blue") != std::string::npos);
    CHECK(dot.find("orange") != std::string::npos);
    CHECK(dot.find("grey") != std::string::npos);
    CHECK(dot.find("--") != std::string::npos);
    CHECK(dot.back() == '\n');
}
