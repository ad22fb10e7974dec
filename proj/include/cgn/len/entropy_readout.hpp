#pragma once

#include <vector>

#include "cgn/diff/params.hpp"

// Entropy-gated readout over concept activations. Each class owns a vector of
// concept relevance scores; their temperature softmax, rescaled so its largest
// entry is 1, masks the inputs of a small per-class affine stack.

namespace cgn::len {

struct LenConfig {
    double temperature = 1.0;
    double entropy_weight = 1e-4;
    /// Concept u is relevant for class c when normalized attention >= this.
    double relevance_threshold = 0.5;
    std::size_t hidden_units = 10;
    std::size_t max_minterms = 10;

    bool operator==(const LenConfig&) const = default;
};

/// Registers `len.relevance` (classes x width) and per-class `len.c{c}.*` weights.
void add_len_params(diff::ParamStore& params, std::size_t width, std::size_t classes, const LenConfig& cfg, Rng& rng);

struct LenOutput {
    diff::Var logits;     // n x classes
    diff::Var attention;  // classes x width, rows sum to 1
};

LenOutput len_forward(const diff::BoundParams& params, diff::Var input, std::size_t classes, const LenConfig& cfg);

/// Cross-entropy over masked rows plus entropy_weight * sum of per-class attention entropies.
diff::Var len_loss(const LenOutput& out, std::span<const int> labels, const std::vector<bool>& mask,
                   const LenConfig& cfg);

/// Attention rows (softmax of relevance / temperature) from stored parameters.
diff::Matrix attention(const diff::ParamStore& params, const LenConfig& cfg);
/// Attention rows divided by their maxima.
diff::Matrix normalized_attention(const diff::ParamStore& params, const LenConfig& cfg);

/// Concepts whose normalized attention clears the relevance threshold, per class.
std::vector<std::vector<std::size_t>> relevant_concepts(const diff::Matrix& normalized, double threshold);

}  // namespace cgn::len
