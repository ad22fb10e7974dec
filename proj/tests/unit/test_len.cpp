#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "cgn/diff/ops.hpp"
#include "cgn/len/entropy_readout.hpp"
#include "cgn/len/formula.hpp"
#include "cgn/metrics/formula_metrics.hpp"
#include "fd_oracle.hpp"

using namespace cgn;
using namespace cgn::diff;
using namespace cgn::len;
using cgn::testing::random_matrix;

namespace {

ParamStore make_len(std::size_t width, std::size_t classes, const LenConfig& cfg, std::uint64_t seed = 1) {
    ParamStore p;
    Rng rng(seed);
    add_len_params(p, width, classes, cfg, rng);
    return p;
}

void set_relevance(ParamStore& p, const Matrix& rel) { p.value(p.index_of("len.relevance")) = rel; }

cem::BooleanConcept patterns(std::size_t width, const std::vector<std::uint64_t>& rows) {
    cem::BooleanConcept r;
    r.width = width;
    r.rows = rows;
    return r;
}

LogicFormula formula(int cls, const std::vector<std::vector<Literal>>& terms) {
    LogicFormula f;
    f.class_id = cls;
    for (const auto& t : terms) f.minterms.push_back(Minterm{t, 1, 1.0});
    return f;
}

}  // namespace

TEST_CASE("equal relevance gives uniform attention and an ln m entropy") {
    LenConfig cfg;
    ParamStore p = make_len(4, 2, cfg);
    set_relevance(p, Matrix(2, 4));
    const Matrix a = attention(p, cfg);
    for (double v : a.data) CHECK(v == doctest::Approx(0.25));
    const Matrix na = normalized_attention(p, cfg);
    for (double v : na.data) CHECK(v == doctest::Approx(1.0));

    Tape t;
    BoundParams bp(p, t);
    Var ent = entropy_rows_sum(softmax_rows(bp["len.relevance"]));
    CHECK(ent.value()(0, 0) == doctest::Approx(2.0 * std::log(4.0)));
}

TEST_CASE("low temperature drives attention to one-hot at the largest relevance") {
    LenConfig cfg;
    cfg.temperature = 1e-4;
    ParamStore p = make_len(3, 2, cfg);
    set_relevance(p, Matrix::from_rows({{0.1, 0.3, 0.2}, {0.05, -0.1, 0.0}}));
    const Matrix a = attention(p, cfg);
    CHECK(a(0, 1) == doctest::Approx(1.0));
    CHECK(a(0, 0) < 1e-12);
    CHECK(a(1, 0) == doctest::Approx(1.0));
    const auto rel = relevant_concepts(normalized_attention(p, cfg), 0.5);
    CHECK(rel[0] == std::vector<std::size_t>{1});
    CHECK(rel[1] == std::vector<std::size_t>{0});
}

TEST_CASE("attention rows sum to one and normalized rows peak at one") {
    LenConfig cfg;
    ParamStore p = make_len(6, 3, cfg, 9);
    const Matrix a = attention(p, cfg);
    const Matrix na = normalized_attention(p, cfg);
    for (std::size_t c = 0; c < 3; ++c) {
        double s = 0.0;
        double mx = 0.0;
        for (std::size_t u = 0; u < 6; ++u) {
            s += a(c, u);
            mx = std::max(mx, na(c, u));
        }
        CHECK(s == doctest::Approx(1.0));
        CHECK(mx == doctest::Approx(1.0));
    }
}

TEST_CASE("one-hot attention makes a logit depend only on its concept") {
    LenConfig cfg;
    cfg.temperature = 1e-4;
    ParamStore p = make_len(3, 2, cfg, 4);
    set_relevance(p, Matrix::from_rows({{0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}}));
    Rng rng(6);
    Matrix x = random_matrix(5, 3, rng, 0.0, 1.0);
    Matrix y = x;
    for (std::size_t i = 0; i < 5; ++i) {
        y(i, 0) = 0.0;
        y(i, 1) = 0.0;
    }
    Tape t;
    BoundParams bp(p, t);
    const Matrix lx = len_forward(bp, t.constant(x), 2, cfg).logits.value();
    const Matrix ly = len_forward(bp, t.constant(y), 2, cfg).logits.value();
    for (std::size_t i = 0; i < 5; ++i) CHECK(lx(i, 0) == doctest::Approx(ly(i, 0)).epsilon(1e-12));
}

TEST_CASE("zero entropy weight reduces the loss to cross-entropy") {
    LenConfig cfg;
    cfg.entropy_weight = 0.0;
    ParamStore p = make_len(4, 3, cfg, 2);
    Rng rng(1);
    const Matrix x = random_matrix(6, 4, rng, 0.0, 1.0);
    const std::vector<int> labels{0, 1, 2, 0, 1, 2};
    const std::vector<bool> mask(6, true);
    Tape t;
    BoundParams bp(p, t);
    LenOutput out = len_forward(bp, t.constant(x), 3, cfg);
    const double plain = cross_entropy_mean(out.logits, labels, mask).value()(0, 0);
    CHECK(len_loss(out, labels, mask, cfg).value()(0, 0) == plain);

    cfg.entropy_weight = 0.5;
    const double ent = entropy_rows_sum(out.attention).value()(0, 0);
    CHECK(len_loss(out, labels, mask, cfg).value()(0, 0) == doctest::Approx(plain + 0.5 * ent));
}

TEST_CASE("readout gradients including relevance match finite differences") {
    LenConfig cfg;
    cfg.entropy_weight = 0.3;
    cfg.temperature = 0.7;
    ParamStore p = make_len(4, 3, cfg, 5);
    Rng rng(12);
    const Matrix x = random_matrix(7, 4, rng, 0.0, 1.0);
    const std::vector<int> labels{0, 1, 2, 2, 1, 0, 1};
    const std::vector<bool> mask{true, true, true, false, true, true, true};
    auto loss_of = [&](const ParamStore& ps, Tape& t) {
        BoundParams bp(ps, t);
        return std::make_pair(len_loss(len_forward(bp, t.constant(x), 3, cfg), labels, mask, cfg), bp.grads());
    };
    Tape t;
    BoundParams bp(p, t);
    Var loss = len_loss(len_forward(bp, t.constant(x), 3, cfg), labels, mask, cfg);
    t.backward(loss);
    const auto grads = bp.grads();
    double worst = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t e = 0; e < p.value(k).data.size(); ++e) {
            const double orig = p.value(k).data[e];
            p.value(k).data[e] = orig + 1e-6;
            Tape tu;
            const double up = loss_of(p, tu).first.value()(0, 0);
            p.value(k).data[e] = orig - 1e-6;
            Tape td;
            const double down = loss_of(p, td).first.value()(0, 0);
            p.value(k).data[e] = orig;
            const double numeric = (up - down) / 2e-6;
            const double denom = std::max({std::abs(numeric), std::abs(grads[k].data[e]), 1e-3});
            worst = std::max(worst, std::abs(numeric - grads[k].data[e]) / denom);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("training concentrates attention on the only informative concept") {
    LenConfig cfg;
    cfg.entropy_weight = 0.01;
    ParamStore p = make_len(4, 2, cfg, 8);
    Rng rng(77);
    const std::size_t n = 200;
    Matrix x = random_matrix(n, 4, rng, 0.0, 1.0);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(i % 2);
        x(i, 2) = labels[i] == 1 ? rng.uniform(0.7, 1.0) : rng.uniform(0.0, 0.3);
    }
    const std::vector<bool> mask(n, true);
    AdamState adam;
    adam.learning_rate = 0.01;
    for (int step = 0; step < 1000; ++step) {
        Tape t;
        BoundParams bp(p, t);
        Var loss = len_loss(len_forward(bp, t.constant(x), 2, cfg), labels, mask, cfg);
        t.backward(loss);
        adam_step(p, bp.grads(), adam);
    }
    const Matrix a = attention(p, cfg);
    CHECK(a(0, 2) > 0.9);
    CHECK(a(1, 2) > 0.9);
}

TEST_CASE("eval_formula: worked rows") {
    const auto r = patterns(4, {0b1010, 0b0011, 0b0001});
    const LogicFormula c1_or_c3 = formula(0, {{{1, true}}, {{3, true}}});
    CHECK(eval_formula(c1_or_c3, r) == std::vector<bool>{true, true, false});
    const LogicFormula c0_and_not_c1 = formula(0, {{{0, true}, {1, false}}});
    CHECK(eval_formula(c0_and_not_c1, r) == std::vector<bool>{false, false, true});
    CHECK(eval_formula(LogicFormula{}, r) == std::vector<bool>{false, false, false});
    CHECK_THROWS_AS(eval_formula(formula(0, {{{4, true}}}), r), std::invalid_argument);
}

TEST_CASE("eval_formula agrees with a truth table on random formulas") {
    Rng rng(31);
    std::vector<std::uint64_t> all(16);
    for (std::uint64_t v = 0; v < 16; ++v) all[v] = v;
    const auto r = patterns(4, all);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<int>> table;
        LogicFormula f;
        const std::size_t terms = 1 + rng.below(3);
        for (std::size_t k = 0; k < terms; ++k) {
            Minterm m;
            std::vector<int> want(4, -1);
            for (std::size_t u = 0; u < 4; ++u) {
                const std::size_t pick = rng.below(3);
                if (pick == 2) continue;
                m.literals.push_back({u, pick == 1});
                want[u] = static_cast<int>(pick);
            }
            f.minterms.push_back(m);
            table.push_back(want);
        }
        const auto got = eval_formula(f, r);
        for (std::uint64_t v = 0; v < 16; ++v) {
            bool expect = false;
            for (const auto& want : table) {
                bool all_match = true;
                for (std::size_t u = 0; u < 4; ++u) {
                    const int bit = static_cast<int>((v >> u) & 1U);
                    if (want[u] >= 0 && want[u] != bit) all_match = false;
                }
                expect = expect || all_match;
            }
            REQUIRE(got[v] == expect);
        }
    }
}

TEST_CASE("extract_formulas: a label equal to one bit gives that bit alone") {
    Rng rng(3);
    std::vector<std::uint64_t> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < 64; ++i) {
        std::uint64_t v = rng.below(16);
        rows.push_back(v);
        labels.push_back(static_cast<int>((v >> 2) & 1U));
    }
    const auto r = patterns(4, rows);
    ExtractionInput in;
    in.patterns = &r;
    in.labels = labels;
    in.predictions = labels;
    in.selection.assign(64, true);
    in.relevant = {{2}, {2}};
    const auto fs = extract_formulas(in);
    REQUIRE(fs.size() == 2);
    CHECK(formulas_to_text({fs[1]}).rfind("y=1 <- c2  #", 0) == 0);
    CHECK(formulas_to_text({fs[0]}).rfind("y=0 <- ~c2  #", 0) == 0);
    CHECK(fs[1].minterms[0].accuracy == 1.0);
    CHECK(metrics::formula_accuracy(fs, r, labels, in.selection, 0) == 1.0);
}

TEST_CASE("extract_formulas: a class sharing one pattern gets exactly one minterm") {
    const auto r = patterns(3, {0b101, 0b101, 0b101, 0b010, 0b011, 0b110});
    ExtractionInput in;
    in.patterns = &r;
    in.labels = {0, 0, 0, 1, 1, 1};
    in.predictions = in.labels;
    in.selection.assign(6, true);
    in.relevant = {{0, 1, 2}, {0, 1, 2}};
    const auto fs = extract_formulas(in);
    REQUIRE(fs[0].minterms.size() == 1);
    CHECK(fs[0].minterms[0].support == 3);
    CHECK(fs[0].minterms[0].literals == std::vector<Literal>{{0, true}, {1, false}, {2, true}});
    CHECK(fs[1].minterms.size() == 3);
}

TEST_CASE("extract_formulas: misclassified-only class is flagged empty") {
    const auto r = patterns(2, {0b01, 0b10, 0b10});
    ExtractionInput in;
    in.patterns = &r;
    in.labels = {0, 1, 1};
    in.predictions = {1, 1, 1};
    in.selection.assign(3, true);
    in.relevant = {{0, 1}, {0, 1}};
    const auto fs = extract_formulas(in);
    CHECK(fs[0].flagged_empty);
    CHECK(fs[0].minterms.empty());
    CHECK_FALSE(fs[1].flagged_empty);
    CHECK(formulas_to_text({fs[0]}) == "y=0 <- false  # flagged-empty\n");
}

TEST_CASE("extract_formulas: a minterm that lowers accuracy is skipped") {
    const auto r = patterns(1, {1, 1, 1, 0, 0, 0, 0, 0});
    ExtractionInput in;
    in.patterns = &r;
    in.labels = {0, 0, 0, 0, 1, 1, 1, 1};
    in.predictions = in.labels;
    in.selection.assign(8, true);
    in.relevant = {{0}, {0}};
    const auto fs = extract_formulas(in);
    REQUIRE(fs[0].minterms.size() == 1);
    CHECK(fs[0].minterms[0].literals == std::vector<Literal>{{0, true}});
    CHECK(fs[0].minterms[0].accuracy == doctest::Approx(7.0 / 8.0));
}

TEST_CASE("extract_formulas: minterm count is capped") {
    const auto r = patterns(2, {0b01, 0b01, 0b01, 0b10, 0b11, 0b11, 0b11});
    ExtractionInput in;
    in.patterns = &r;
    in.labels = {0, 0, 0, 0, 1, 1, 1};
    in.predictions = {0, 0, 0, 0, 1, 1, 0};
    in.selection.assign(7, true);
    in.relevant = {{0, 1}, {0, 1}};
    in.max_minterms = 1;
    const auto fs = extract_formulas(in);
    CHECK(fs[0].minterms.size() == 1);
    CHECK(fs[0].minterms[0].support == 3);
}

TEST_CASE("formula text round-trips") {
    std::vector<LogicFormula> fs{formula(0, {{{4, true}, {1, false}}, {{7, true}}}), LogicFormula{}, formula(2, {{}})};
    fs[0].minterms[0].support = 12;
    fs[0].minterms[0].accuracy = 0.95;
    fs[0].minterms[1].support = 3;
    fs[0].minterms[1].accuracy = 0.1 + 0.2;
    fs[1].class_id = 1;
    fs[1].flagged_empty = true;
    const std::string text = formulas_to_text(fs);
    CHECK(text.rfind("y=0 <- c4 & ~c1 | c7  # support=12,3 accuracy=0.95,", 0) == 0);
    const auto back = parse_formulas("# header\n\n" + text);
    REQUIRE(back.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(back[c].class_id == fs[c].class_id);
        CHECK(back[c].flagged_empty == fs[c].flagged_empty);
        REQUIRE(back[c].minterms.size() == fs[c].minterms.size());
        for (std::size_t k = 0; k < fs[c].minterms.size(); ++k) {
            CHECK(back[c].minterms[k].literals == fs[c].minterms[k].literals);
            CHECK(back[c].minterms[k].support == fs[c].minterms[k].support);
            CHECK(back[c].minterms[k].accuracy == fs[c].minterms[k].accuracy);
        }
    }
    CHECK(formulas_to_text(back) == text);
}

TEST_CASE("formula parser rejects malformed lines") {
    CHECK_THROWS_AS(parse_formulas("x=0 <- c1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_formulas("y=0 <- d1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_formulas("y=0 <- c1 |\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_formulas("y=0 <- c1  # support=1,2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_formulas("y=0 <- c1  # colour=red\n"), std::invalid_argument);
}
