#pragma once

#include "cgn/diff/matrix.hpp"

// Dense and sparse product kernels. Each kernel has a serial reference and an
// OpenMP version. Both versions assign every output element to exactly one
// thread and accumulate in the same order, so their results are bit-identical.

namespace cgn::diff::kernels {

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);        // a * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);   // a^T * b
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);   // a * b^T
Matrix spmm(const SparseMatrix& s, const Matrix& x);    // s * x
}  // namespace serial

namespace parallel {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix spmm(const SparseMatrix& s, const Matrix& x);
}  // namespace parallel

// Dispatching entry points: the OpenMP path is taken once the output is large
// enough to amortize a parallel region.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);
Matrix spmm(const SparseMatrix& s, const Matrix& x);

/// Number of threads the parallel kernels will use (1 without OpenMP).
int thread_count();

}  // namespace cgn::diff::kernels
