#include "cgn/metrics/kmeans.hpp"

#include <limits>
#include <stdexcept>

#include "cgn/diff/rng.hpp"

namespace cgn::metrics {

using diff::Matrix;

namespace {

double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < a.cols; ++d) {
        const double t = a(i, d) - b(j, d);
        s += t * t;
    }
    return s;
}

void copy_row(const Matrix& from, std::size_t i, Matrix& to, std::size_t j) {
    for (std::size_t d = 0; d < from.cols; ++d) to(j, d) = from(i, d);
}

}  // namespace

KMeansResult kmeans(const Matrix& x, const KMeansConfig& cfg) {
    const std::size_t n = x.rows;
    const std::size_t k = cfg.k;
    if (k < 2) throw std::invalid_argument("kmeans: k must be at least 2");
    if (n < k) throw std::invalid_argument("kmeans: fewer points than clusters");
    Rng rng(cfg.seed);
    KMeansResult res;
    res.centroids = Matrix(k, x.cols);

    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.below(n);
    copy_row(x, first, res.centroids, 0);
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], sq_dist(x, i, res.centroids, c - 1));
            total += nearest[i];
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                target -= nearest[i];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        copy_row(x, pick, res.centroids, c);
    }

    res.assignment.assign(n, k);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = sq_dist(x, i, res.centroids, 0);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = sq_dist(x, i, res.centroids, c);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (res.assignment[i] != best) {
                res.assignment[i] = best;
                changed = true;
            }
        }
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) ++sizes[res.assignment[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (sizes[res.assignment[i]] <= 1) continue;
                const double d = sq_dist(x, i, res.centroids, res.assignment[i]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            --sizes[res.assignment[far]];
            res.assignment[far] = c;
            sizes[c] = 1;
            changed = true;
        }
        res.centroids.fill(0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < x.cols; ++d) res.centroids(res.assignment[i], d) += x(i, d);
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < x.cols; ++d) res.centroids(c, d) /= static_cast<double>(sizes[c]);
        }
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) obj += sq_dist(x, i, res.centroids, res.assignment[i]);
        res.objective.push_back(obj);
        res.iterations = it + 1;
        if (!changed) break;
    }
    return res;
}

std::size_t default_k(const std::string& dataset) {
    if (dataset == "ba-shapes" || dataset == "ba-grid" || dataset == "tree-grid" || dataset == "tree-cycles") return 10;
    return 30;
}

}  // namespace cgn::metrics
