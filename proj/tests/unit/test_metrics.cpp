#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cgn/diff/rng.hpp"
#include "cgn/metrics/decision_tree.hpp"
#include "cgn/metrics/formula_metrics.hpp"
#include "cgn/metrics/ged.hpp"
#include "cgn/metrics/kmeans.hpp"
#include "cgn/metrics/stats.hpp"

using namespace cgn;
using namespace cgn::metrics;
using diff::Matrix;

namespace {

EditGraph make_graph(std::size_t n, std::vector<graph::Edge> edges) {
    EditGraph g;
    g.node_count = n;
    g.edges = std::move(edges);
    return g;
}

EditGraph random_graph(Rng& rng, std::size_t max_nodes) {
    EditGraph g;
    g.node_count = rng.below(max_nodes + 1);
    for (std::size_t i = 0; i < g.node_count; ++i) {
        for (std::size_t j = i + 1; j < g.node_count; ++j) {
            if (rng.uniform() < 0.4) g.edges.emplace_back(i, j);
        }
    }
    return g;
}

bool has_edge(const EditGraph& g, std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return std::find(g.edges.begin(), g.edges.end(), graph::Edge{a, b}) != g.edges.end();
}

/// Minimum edit-path cost over every partial injective mapping of a into b.
int brute_force_ged(const EditGraph& a, const EditGraph& b) {
    const std::size_t deleted = b.node_count;
    std::vector<std::size_t> map(a.node_count, deleted);
    int best = std::numeric_limits<int>::max();
    std::vector<bool> used(b.node_count, false);
    auto score = [&]() {
        int cost = 0;
        std::size_t mapped = 0;
        for (std::size_t i = 0; i < a.node_count; ++i) {
            if (map[i] == deleted) ++cost;
            else ++mapped;
        }
        cost += static_cast<int>(b.node_count - mapped);
        for (auto [i, j] : a.edges) {
            if (map[i] == deleted || map[j] == deleted || !has_edge(b, map[i], map[j])) ++cost;
        }
        for (auto [u, v] : b.edges) {
            bool covered = false;
            for (std::size_t i = 0; i < a.node_count && !covered; ++i) {
                for (std::size_t j = 0; j < a.node_count && !covered; ++j) {
                    if (map[i] == u && map[j] == v && has_edge(a, i, j)) covered = true;
                }
            }
            if (!covered) ++cost;
        }
        return cost;
    };
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == a.node_count) {
            best = std::min(best, score());
            return;
        }
        map[i] = deleted;
        self(self, i + 1);
        for (std::size_t v = 0; v < b.node_count; ++v) {
            if (used[v]) continue;
            used[v] = true;
            map[i] = v;
            self(self, i + 1);
            used[v] = false;
        }
        map[i] = deleted;
    };
    rec(rec, 0);
    return best;
}

int ged(const EditGraph& a, const EditGraph& b) {
    const GedResult r = graph_edit_distance(a, b);
    REQUIRE(r.distance.has_value());
    return *r.distance;
}

graph::Subgraph cycle_subgraph(std::size_t n, std::vector<graph::Edge> extra = {}) {
    graph::Subgraph s;
    for (std::size_t i = 0; i < n; ++i) {
        s.nodes.push_back(i);
        s.edges.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
    }
    for (auto e : extra) s.edges.push_back(e);
    return s;
}

Matrix bits(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

}  // namespace

TEST_CASE("decision tree: constant labels make a single leaf") {
    const Matrix x = bits({{0, 1}, {1, 0}, {1, 1}});
    const auto t = DecisionTree::fit(x, {2, 2, 2}, {true, true, true});
    CHECK(t.leaf_count() == 1);
    CHECK(t.depth() == 0);
    CHECK(t.predict(x) == std::vector<int>{2, 2, 2});
}

TEST_CASE("decision tree: AND and XOR are learned at depth two") {
    const Matrix x = bits({{0, 0}, {0, 1}, {1, 0}, {1, 1}});
    const std::vector<bool> all(4, true);
    const auto t_and = DecisionTree::fit(x, {0, 0, 0, 1}, all);
    CHECK(t_and.predict(x) == std::vector<int>{0, 0, 0, 1});
    CHECK(t_and.depth() == 2);
    const auto t_xor = DecisionTree::fit(x, {0, 1, 1, 0}, all);
    CHECK(t_xor.predict(x) == std::vector<int>{0, 1, 1, 0});
    CHECK(t_xor.depth() == 2);
}

TEST_CASE("decision tree: first-index tie-breaking on equally good features") {
    const Matrix x = bits({{0, 0}, {1, 1}});
    const auto t = DecisionTree::fit(x, {0, 1}, {true, true});
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].feature == 0);
}

TEST_CASE("decision tree: perfect train fit whenever labels are a function of the encoding") {
    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 120;
        const std::size_t m = 5;
        std::vector<int> lut(1U << m);
        for (int& v : lut) v = static_cast<int>(rng.below(3));
        Matrix x(n, m);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t key = 0;
            for (std::size_t u = 0; u < m; ++u) {
                const bool b = rng.uniform() < 0.5;
                x(i, u) = b ? 1.0 : 0.0;
                key |= static_cast<std::size_t>(b) << u;
            }
            y[i] = lut[key];
        }
        const auto t = DecisionTree::fit(x, y, std::vector<bool>(n, true));
        REQUIRE(t.predict(x) == y);
    }
}

TEST_CASE("decision tree: leaves respect the depth limit") {
    Rng rng(2);
    Matrix x(200, 6);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t u = 0; u < 6; ++u) x(i, u) = rng.uniform();
        y[i] = static_cast<int>(rng.below(2));
    }
    CHECK(DecisionTree::fit(x, y, std::vector<bool>(200, true), 3).depth() <= 3);
}

TEST_CASE("completeness: deterministic labels score 1, independent labels near chance") {
    Rng rng(5);
    const std::size_t n = 2000;
    cem::BooleanConcept r;
    r.width = 4;
    std::vector<int> det(n);
    std::vector<int> noise(n);
    std::vector<bool> train(n);
    std::vector<bool> test(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.rows.push_back(rng.below(16));
        det[i] = static_cast<int>(std::popcount(r.rows.back()) % 2);
        noise[i] = static_cast<int>(rng.below(2));
        train[i] = i % 5 != 0;
        test[i] = !train[i];
    }
    const Matrix enc = bits_to_features(r);
    CHECK(concept_completeness(enc, det, train, test) == 1.0);
    const double chance = concept_completeness(enc, noise, train, test);
    CHECK(chance > 0.4);
    CHECK(chance < 0.6);
    CHECK(concept_completeness(enc, noise, train, test) == chance);
}

TEST_CASE("one_hot encodes cluster ids") {
    const Matrix m = one_hot({2, 0}, 3);
    CHECK(m.data == std::vector<double>{0, 0, 1, 1, 0, 0});
}

TEST_CASE("ged: worked distances") {
    const EditGraph path = make_graph(3, {{0, 1}, {1, 2}});
    const EditGraph tri = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(ged(path, path) == 0);
    CHECK(ged(path, tri) == 1);
    CHECK(ged(make_graph(0, {}), make_graph(2, {{0, 1}})) == 3);
    CHECK(ged(make_graph(2, {{0, 1}}), make_graph(0, {})) == 3);
}

TEST_CASE("ged: node kinds cost a relabel when both graphs carry them") {
    EditGraph a = make_graph(1, {});
    EditGraph b = make_graph(1, {});
    a.kinds = {0};
    b.kinds = {1};
    CHECK(ged(a, b) == 1);
    b.kinds = {0};
    CHECK(ged(a, b) == 0);
}

TEST_CASE("ged: oversized graphs are skipped with a marker") {
    GedOptions opt;
    opt.size_cap = 4;
    const GedResult r = graph_edit_distance(make_graph(5, {}), make_graph(2, {}), opt);
    CHECK_FALSE(r.distance.has_value());
    CHECK(r.skipped == "over-cap");
    CHECK(ged_size_cap("ba-shapes") == 10);
    CHECK(ged_size_cap("ba-community") == 10);
    CHECK(ged_size_cap("tree-cycles") == 12);
    CHECK(ged_size_cap("tree-grid") == 13);
}

TEST_CASE("ged: exhausting the search budget is reported, not guessed") {
    GedOptions opt;
    opt.expansion_budget = 1;
    Rng rng(4);
    const GedResult r = graph_edit_distance(random_graph(rng, 5), make_graph(5, {{0, 1}, {2, 3}}), opt);
    if (!r.distance) CHECK(r.skipped == "budget");
}

TEST_CASE("ged: A* matches brute force on random small pairs") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const EditGraph a = random_graph(rng, 5);
        const EditGraph b = random_graph(rng, 5);
        REQUIRE(ged(a, b) == brute_force_ged(a, b));
    }
}

TEST_CASE("ged: metric axioms on random triples") {
    Rng rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const EditGraph a = random_graph(rng, 5);
        const EditGraph b = random_graph(rng, 5);
        const EditGraph c = random_graph(rng, 5);
        const int ab = ged(a, b);
        const int bc = ged(b, c);
        const int ac = ged(a, c);
        REQUIRE(ab >= 0);
        REQUIRE(ab == ged(b, a));
        REQUIRE(ac <= ab + bc);
        REQUIRE(ged(a, a) == 0);
        REQUIRE((ab == 0) == (brute_force_ged(a, b) == 0));

        std::vector<std::size_t> perm(a.node_count);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        EditGraph pa = make_graph(a.node_count, {});
        for (auto [u, v] : a.edges) pa.edges.emplace_back(std::min(perm[u], perm[v]), std::max(perm[u], perm[v]));
        REQUIRE(ged(a, pa) == 0);
    }
}

TEST_CASE("purity: identical neighborhoods score zero") {
    const auto c6 = cycle_subgraph(6);
    const PurityReport rep = concept_purity({{c6, c6, c6}}, false, {});
    REQUIRE(rep.minimum.has_value());
    CHECK(*rep.minimum == 0.0);
    CHECK(rep.eligible == 1);
}

TEST_CASE("purity: cycle against itself and a chorded cycle averages to one half") {
    const auto c6 = cycle_subgraph(6);
    const auto chord = cycle_subgraph(6, {{0, 3}});
    const PurityReport rep = concept_purity({{c6, c6, chord}, {c6, chord, chord}}, false, {});
    REQUIRE(rep.concepts.size() == 2);
    CHECK(*rep.concepts[0].score == doctest::Approx(0.5));
    CHECK(*rep.concepts[0].ged_second == 0);
    CHECK(*rep.concepts[0].ged_third == 1);
    CHECK(*rep.concepts[1].score == doctest::Approx(1.0));
    CHECK(*rep.minimum == doctest::Approx(0.5));
    CHECK(*rep.minimum_pairwise == doctest::Approx(0.0));
}

TEST_CASE("purity: small or oversized concepts are excluded") {
    const auto c6 = cycle_subgraph(6);
    GedOptions opt;
    opt.size_cap = 5;
    const PurityReport rep = concept_purity({{c6, c6}, {c6, c6, c6}}, false, opt);
    CHECK(rep.eligible == 0);
    CHECK_FALSE(rep.minimum.has_value());
    CHECK_FALSE(rep.concepts[0].score.has_value());
    CHECK_FALSE(rep.concepts[1].score.has_value());
    CHECK(rep.concepts[1].skipped == "over-cap");
}

TEST_CASE("formula accuracy: exact exclusive formulas, empty formulas, complexity") {
    cem::BooleanConcept r;
    r.width = 2;
    r.rows = {0b01, 0b10, 0b01, 0b10, 0b10};
    const std::vector<int> labels{0, 1, 0, 1, 1};
    const std::vector<bool> all(5, true);
    len::LogicFormula f0;
    f0.class_id = 0;
    f0.minterms.push_back({{{0, true}}, 2, 1.0});
    len::LogicFormula f1;
    f1.class_id = 1;
    f1.minterms.push_back({{{1, true}}, 3, 1.0});
    CHECK(formula_accuracy({f0, f1}, r, labels, all, 1) == 1.0);

    len::LogicFormula e0;
    len::LogicFormula e1;
    e1.class_id = 1;
    const int maj = majority_class(labels, all);
    CHECK(maj == 1);
    CHECK(formula_accuracy({e0, e1}, r, labels, all, maj) == doctest::Approx(0.6));
    CHECK(formula_complexity({e0, e1}) == 0.0);

    len::LogicFormula two = f0;
    two.minterms.push_back({{{1, true}}, 1, 0.5});
    CHECK(formula_complexity({two}) == 2.0);
}

TEST_CASE("formula predictions: overlapping formulas defer to the larger support") {
    cem::BooleanConcept r;
    r.width = 2;
    r.rows = {0b11, 0b00};
    len::LogicFormula f0;
    f0.minterms.push_back({{{0, true}}, 2, 1.0});
    len::LogicFormula f1;
    f1.class_id = 1;
    f1.minterms.push_back({{{1, true}}, 9, 1.0});
    CHECK(formula_predictions({f0, f1}, r, 0) == std::vector<int>{1, 0});
    f1.minterms[0].support = 2;
    CHECK(formula_predictions({f0, f1}, r, 1) == std::vector<int>{0, 1});
}

TEST_CASE("k-means: two well separated pairs") {
    const Matrix x = Matrix::from_rows({{0, 0}, {0, 1}, {10, 10}, {10, 11}});
    KMeansConfig cfg;
    cfg.k = 2;
    const auto res = kmeans(x, cfg);
    CHECK(res.assignment[0] == res.assignment[1]);
    CHECK(res.assignment[2] == res.assignment[3]);
    CHECK(res.assignment[0] != res.assignment[2]);
    const std::size_t a = res.assignment[0];
    CHECK(res.centroids(a, 0) == 0.0);
    CHECK(res.centroids(a, 1) == 0.5);
    CHECK(res.centroids(1 - a, 0) == 10.0);
    CHECK(res.centroids(1 - a, 1) == 10.5);
}

TEST_CASE("k-means: one cluster per point leaves no variance") {
    Rng rng(8);
    Matrix x(6, 3);
    for (double& v : x.data) v = rng.uniform();
    KMeansConfig cfg;
    cfg.k = 6;
    const auto res = kmeans(x, cfg);
    CHECK(res.objective.back() == 0.0);
    CHECK(std::set<std::size_t>(res.assignment.begin(), res.assignment.end()).size() == 6);
}

TEST_CASE("k-means: duplicate points still fill every cluster") {
    const Matrix x = Matrix::from_rows({{0}, {0}, {0}, {0}, {5}});
    KMeansConfig cfg;
    cfg.k = 3;
    const auto res = kmeans(x, cfg);
    CHECK(std::set<std::size_t>(res.assignment.begin(), res.assignment.end()).size() == 3);
}

TEST_CASE("k-means: objective never increases and runs are reproducible") {
    Rng rng(99);
    Matrix x(300, 4);
    for (double& v : x.data) v = rng.uniform(-3.0, 3.0);
    KMeansConfig cfg;
    cfg.k = 7;
    cfg.seed = 5;
    const auto res = kmeans(x, cfg);
    for (std::size_t i = 1; i < res.objective.size(); ++i) CHECK(res.objective[i] <= res.objective[i - 1] + 1e-9);
    CHECK(kmeans(x, cfg).assignment == res.assignment);
    CHECK(default_k("ba-shapes") == 10);
    CHECK(default_k("ba-community") == 30);
    cfg.k = 400;
    CHECK_THROWS_AS(kmeans(x, cfg), std::invalid_argument);
}

// Reference values below were computed once with scipy.stats (shapiro,
// boxcox_llf on the same grid, t.ppf) and frozen here.
TEST_CASE("stats: t-interval of a normal sample") {
    const auto s = summarize_runs({0.90, 0.91, 0.92, 0.93, 0.94});
    CHECK(s.mean == doctest::Approx(0.92));
    CHECK((s.ci_high - s.mean) == doctest::Approx(0.01963243161477558).epsilon(1e-6));
    CHECK((s.mean - s.ci_low) == doctest::Approx(0.01963243161477558).epsilon(1e-6));
    CHECK(std::abs((s.ci_high - s.mean) - 0.0196) < 1e-4);
    CHECK_FALSE(s.transformed);
    CHECK(s.lambda == 1.0);
    CHECK(s.normality_p == doctest::Approx(0.967173934972857).epsilon(1e-6));
}

TEST_CASE("stats: t quantile and Shapiro-Wilk against frozen references") {
    CHECK(t_quantile(0.975, 4) == doctest::Approx(2.7764451051977987).epsilon(1e-10));
    const auto a = shapiro_wilk({0.5, 0.52, 0.55, 0.61, 0.99});
    CHECK(a.w == doctest::Approx(0.730000783770759).epsilon(1e-6));
    CHECK(a.p_value == doctest::Approx(0.019224946818428415).epsilon(1e-4));
    const auto b = shapiro_wilk({0.1, 0.2, 0.3, 0.35, 0.9});
    CHECK(b.w == doctest::Approx(0.8312575064617735).epsilon(1e-6));
    CHECK(b.p_value == doctest::Approx(0.1421684840319627).epsilon(1e-4));
    const auto c = shapiro_wilk({0.97, 0.98, 0.985, 0.99, 0.40});
    CHECK(c.w == doctest::Approx(0.5790168184164144).epsilon(1e-6));
    CHECK(c.p_value == doctest::Approx(0.00032286062805495343).epsilon(1e-3));
}

TEST_CASE("stats: Box-Cox grid search and transform inverse") {
    CHECK(boxcox_lambda({0.90, 0.91, 0.92, 0.93, 0.94}) == doctest::Approx(0.71));
    CHECK(boxcox_lambda({0.5, 0.52, 0.55, 0.61, 0.99}) == doctest::Approx(-3.97));
    CHECK(boxcox_lambda({0.1, 0.2, 0.3, 0.35, 0.9}) == doctest::Approx(-0.12));
    CHECK(boxcox_lambda({0.97, 0.98, 0.985, 0.99, 0.40}) == doctest::Approx(5.0));
    for (double lam : {-2.0, 0.0, 0.5, 1.0, 3.0}) {
        CHECK(inverse_boxcox(boxcox(0.37, lam), lam) == doctest::Approx(0.37));
    }
    CHECK(boxcox(2.0, 0.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("stats: non-normal sample goes through the transform and keeps the mean inside") {
    const auto s = summarize_runs({0.5, 0.52, 0.55, 0.61, 0.99});
    CHECK(s.transformed);
    CHECK(s.lambda == doctest::Approx(-3.97));
    CHECK(s.ci_low <= s.mean);
    CHECK(s.mean <= s.ci_high);
    CHECK(s.ci_low > 0.0);
}

TEST_CASE("stats: degenerate samples give a zero-width interval") {
    const auto s = summarize_runs({0.8, 0.8, 0.8, 0.8, 0.8});
    CHECK(s.mean == doctest::Approx(0.8));
    CHECK(s.ci_low == s.ci_high);
    const auto z = summarize_runs({0.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(z.ci_high - z.ci_low == 0.0);
}

TEST_CASE("stats: samples containing zero are offset before transforming") {
    const auto s = summarize_runs({0.0, 0.0, 0.0, 0.0, 0.9});
    CHECK(std::isfinite(s.ci_low));
    CHECK(std::isfinite(s.ci_high));
    CHECK(s.ci_low <= s.mean);
    CHECK(s.mean <= s.ci_high);
}
