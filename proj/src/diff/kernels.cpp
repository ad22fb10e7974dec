#include "cgn/diff/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cgn::diff {

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<std::tuple<std::size_t, std::size_t, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const auto& x, const auto& y) {
        return std::get<0>(x) != std::get<0>(y) ? std::get<0>(x) < std::get<0>(y) : std::get<1>(x) < std::get<1>(y);
    });
    SparseMatrix s;
    s.rows = rows;
    s.cols = cols;
    s.row_ptr.assign(rows + 1, 0);
    for (const auto& [r, c, v] : triplets) {
        if (r >= rows || c >= cols) throw std::out_of_range("SparseMatrix: triplet outside shape");
        s.col_idx.push_back(c);
        s.values.push_back(v);
        ++s.row_ptr[r + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) s.row_ptr[r + 1] += s.row_ptr[r];

    // merge duplicates (sorted, so duplicates are adjacent within a row)
    SparseMatrix merged;
    merged.rows = rows;
    merged.cols = cols;
    merged.row_ptr.assign(rows + 1, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
            if (k > s.row_ptr[r] && s.col_idx[k] == s.col_idx[k - 1]) {
                merged.values.back() += s.values[k];
            } else {
                merged.col_idx.push_back(s.col_idx[k]);
                merged.values.push_back(s.values[k]);
            }
        }
        merged.row_ptr[r + 1] = merged.values.size();
    }
    return merged;
}

SparseMatrix SparseMatrix::transposed() const {
    std::vector<std::tuple<std::size_t, std::size_t, double>> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) t.emplace_back(col_idx[k], r, values[k]);
    }
    return from_triplets(cols, rows, std::move(t));
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d(r, col_idx[k]) += values[k];
    }
    return d;
}

namespace kernels {

namespace {

void check_inner(const char* op, std::size_t lhs, std::size_t rhs, const std::string& a, const std::string& b) {
    if (lhs != rhs) {
        throw std::invalid_argument(std::string(op) + ": dimension mismatch " + a + " vs " + b);
    }
}

// One output row of a*b. Shared by both versions so the summation
// order is identical.
inline void matmul_rows(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    double* out = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = b.data.data() + k * b.cols;
        for (std::size_t j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
    }
}

inline void matmul_at_b_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t k) {
    double* out = c.data.data() + k * c.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        const double* brow = b.data.data() + i * b.cols;
        for (std::size_t j = 0; j < b.cols; ++j) out[j] += aik * brow[j];
    }
}

inline void matmul_a_bt_row(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const double* arow = a.data.data() + i * a.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
        const double* brow = b.data.data() + j * b.cols;
        double acc = 0.0;
        for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
        c(i, j) = acc;
    }
}

inline void spmm_row(const SparseMatrix& s, const Matrix& x, Matrix& y, std::size_t r) {
    double* out = y.data.data() + r * y.cols;
    for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
        const double v = s.values[k];
        const double* xrow = x.data.data() + s.col_idx[k] * x.cols;
        for (std::size_t j = 0; j < x.cols; ++j) out[j] += v * xrow[j];
    }
}

constexpr std::size_t kParallelThreshold = 1 << 14;

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner("matmul", a.cols, b.rows, a.shape_str(), b.shape_str());
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) matmul_rows(a, b, c, i);
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner("matmul_at_b", a.rows, b.rows, a.shape_str(), b.shape_str());
    Matrix c(a.cols, b.cols);
    for (std::size_t k = 0; k < a.cols; ++k) matmul_at_b_row(a, b, c, k);
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner("matmul_a_bt", a.cols, b.cols, a.shape_str(), b.shape_str());
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) matmul_a_bt_row(a, b, c, i);
    return c;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    check_inner("spmm", s.cols, x.rows, std::to_string(s.rows) + "x" + std::to_string(s.cols), x.shape_str());
    Matrix y(s.rows, x.cols);
    for (std::size_t r = 0; r < s.rows; ++r) spmm_row(s, x, y, r);
    return y;
}

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_inner("matmul", a.cols, b.rows, a.shape_str(), b.shape_str());
    Matrix c(a.rows, b.cols);
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) matmul_rows(a, b, c, static_cast<std::size_t>(i));
    return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    check_inner("matmul_at_b", a.rows, b.rows, a.shape_str(), b.shape_str());
    Matrix c(a.cols, b.cols);
    const auto n = static_cast<std::ptrdiff_t>(a.cols);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) matmul_at_b_row(a, b, c, static_cast<std::size_t>(k));
    return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    check_inner("matmul_a_bt", a.cols, b.cols, a.shape_str(), b.shape_str());
    Matrix c(a.rows, b.rows);
    const auto n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) matmul_a_bt_row(a, b, c, static_cast<std::size_t>(i));
    return c;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    check_inner("spmm", s.cols, x.rows, std::to_string(s.rows) + "x" + std::to_string(s.cols), x.shape_str());
    Matrix y(s.rows, x.cols);
    const auto n = static_cast<std::ptrdiff_t>(s.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < n; ++r) spmm_row(s, x, y, static_cast<std::size_t>(r));
    return y;
}

}  // namespace parallel

Matrix matmul(const Matrix& a, const Matrix& b) {
    return a.rows * b.cols * a.cols >= kParallelThreshold && thread_count() > 1 ? parallel::matmul(a, b)
                                                                                : serial::matmul(a, b);
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
    return a.cols * b.cols * a.rows >= kParallelThreshold && thread_count() > 1 ? parallel::matmul_at_b(a, b)
                                                                                : serial::matmul_at_b(a, b);
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    return a.rows * b.rows * a.cols >= kParallelThreshold && thread_count() > 1 ? parallel::matmul_a_bt(a, b)
                                                                                : serial::matmul_a_bt(a, b);
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    return s.nnz() * x.cols >= kParallelThreshold && thread_count() > 1 ? parallel::spmm(s, x) : serial::spmm(s, x);
}

int thread_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace kernels
}  // namespace cgn::diff
