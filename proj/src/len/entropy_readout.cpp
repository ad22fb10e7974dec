#include "cgn/len/entropy_readout.hpp"

#include <stdexcept>
#include <string>

#include "cgn/diff/ops.hpp"

namespace cgn::len {

using diff::Matrix;
using diff::Var;

namespace {
std::string prefix(std::size_t c) { return "len.c" + std::to_string(c) + "."; }
}  // namespace

void add_len_params(diff::ParamStore& params, std::size_t width, std::size_t classes, const LenConfig& cfg, Rng& rng) {
    Matrix relevance(classes, width);
    for (double& v : relevance.data) v = rng.uniform(-0.1, 0.1);
    params.add("len.relevance", std::move(relevance));
    for (std::size_t c = 0; c < classes; ++c) {
        params.add_glorot(prefix(c) + "w1", width, cfg.hidden_units, rng);
        params.add(prefix(c) + "b1", Matrix(1, cfg.hidden_units));
        params.add_glorot(prefix(c) + "w2", cfg.hidden_units, 1, rng);
        params.add(prefix(c) + "b2", Matrix(1, 1));
    }
}

LenOutput len_forward(const diff::BoundParams& params, Var input, std::size_t classes, const LenConfig& cfg) {
    if (!(cfg.temperature > 0.0)) throw std::invalid_argument("len_forward: temperature must be positive");
    Var att = diff::softmax_rows(diff::scale(params["len.relevance"], 1.0 / cfg.temperature));
    Var mask = diff::normalize_by_row_max(att, 0.0);
    std::vector<Var> per_class;
    per_class.reserve(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        const std::string p = prefix(c);
        Var gated = diff::mul_row(input, diff::row(mask, c));
        Var hidden = diff::leaky_relu(diff::add_row(diff::matmul(gated, params[p + "w1"]), params[p + "b1"]), 0.01);
        per_class.push_back(diff::add_row(diff::matmul(hidden, params[p + "w2"]), params[p + "b2"]));
    }
    return {diff::concat_cols(per_class), att};
}

Var len_loss(const LenOutput& out, std::span<const int> labels, const std::vector<bool>& mask, const LenConfig& cfg) {
    Var ce = diff::cross_entropy_mean(out.logits, labels, mask);
    if (cfg.entropy_weight == 0.0) return ce;
    return diff::add(ce, diff::scale(diff::entropy_rows_sum(out.attention), cfg.entropy_weight));
}

Matrix attention(const diff::ParamStore& params, const LenConfig& cfg) {
    diff::Tape t;
    return diff::softmax_rows(diff::scale(t.constant(params.value(params.index_of("len.relevance"))),
                                          1.0 / cfg.temperature))
        .value();
}

Matrix normalized_attention(const diff::ParamStore& params, const LenConfig& cfg) {
    diff::Tape t;
    return diff::normalize_by_row_max(t.constant(attention(params, cfg)), 0.0).value();
}

std::vector<std::vector<std::size_t>> relevant_concepts(const Matrix& normalized, double threshold) {
    std::vector<std::vector<std::size_t>> out(normalized.rows);
    for (std::size_t c = 0; c < normalized.rows; ++c) {
        for (std::size_t u = 0; u < normalized.cols; ++u) {
            if (normalized(c, u) >= threshold) out[c].push_back(u);
        }
    }
    return out;
}

}  // namespace cgn::len
