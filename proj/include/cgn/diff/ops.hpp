#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cgn/diff/tape.hpp"

// Differentiable primitives. Every op records its result on the tape of its
// first operand together with the vector-Jacobian rule for each parent.

namespace cgn::diff {

/// Constant sparse operator with its transpose cached for the backward rule.
struct SparseOperator {
    SparseMatrix forward;
    SparseMatrix transpose;

    explicit SparseOperator(SparseMatrix s) : forward(std::move(s)), transpose(forward.transposed()) {}
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// x (n x m) plus a broadcast row (1 x m).
Var add_row(Var x, Var row);
/// x (n x m) times a broadcast row (1 x m), elementwise.
Var mul_row(Var x, Var row);
Var mul(Var a, Var b);
Var scale(Var x, double s);
Var leaky_relu(Var x, double slope);
Var relu(Var x);
Var spmm(std::shared_ptr<const SparseOperator> s, Var x);

/// Row softmax, stabilized by subtracting the row maximum.
Var softmax_rows(Var x);
Var log_softmax_rows(Var x);
/// y = x / (max(row) + eps) per row; the max is routed to the first argmax.
Var normalize_by_row_max(Var x, double eps);
/// Row i of x as a 1 x m matrix.
Var row(Var x, std::size_t i);
Var concat_cols(std::span<const Var> parts);

Var sum(Var x);
/// Sum over rows of the Shannon entropy -sum p log p (entries must be > 0).
Var entropy_rows_sum(Var p);

/// Mean negative log-likelihood of the masked rows, computed through a
/// log-softmax of `logits`. Throws if the mask selects no row.
Var cross_entropy_mean(Var logits, std::span<const int> labels, const std::vector<bool>& mask);

/// Row j = mean of rows of x whose segment id is j. Ids must cover [0, count)
/// with every segment nonempty.
Var segment_mean(Var x, std::span<const std::size_t> segment_ids, std::size_t count);

}  // namespace cgn::diff
