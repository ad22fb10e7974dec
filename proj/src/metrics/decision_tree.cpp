#include "cgn/metrics/decision_tree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace cgn::metrics {

using diff::Matrix;

namespace {

double gini(const std::map<int, std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double s = 1.0;
    for (const auto& [label, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        s -= p * p;
    }
    return s;
}

int majority(const std::map<int, std::size_t>& counts) {
    int best = 0;
    std::size_t best_count = 0;
    for (const auto& [label, c] : counts) {
        if (c > best_count) {
            best = label;
            best_count = c;
        }
    }
    return best;
}

struct Builder {
    const Matrix& x;
    const std::vector<int>& y;
    std::size_t max_depth;
    std::vector<DecisionTree::Node>& nodes;

    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        std::map<int, std::size_t> counts;
        for (std::size_t i : rows) ++counts[y[i]];
        const int index = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[index].label = majority(counts);
        if (counts.size() <= 1 || depth >= max_depth) return index;

        const std::size_t n = rows.size();
        double best_score = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = rows;
        for (std::size_t f = 0; f < x.cols; ++f) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
            std::map<int, std::size_t> left;
            std::map<int, std::size_t> right = counts;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                const int label = y[order[k]];
                ++left[label];
                if (--right[label] == 0) right.erase(label);
                const double lo = x(order[k], f);
                const double hi = x(order[k + 1], f);
                if (!(lo < hi)) continue;
                const std::size_t nl = k + 1;
                const std::size_t nr = n - nl;
                const double score = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                                     static_cast<double>(n);
                if (best_feature < 0 || score < best_score - 1e-12) {
                    best_score = score;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (lo + hi);
                }
            }
        }
        if (best_feature < 0) return index;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t i : rows) {
            (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows : right_rows).push_back(i);
        }
        rows.clear();
        rows.shrink_to_fit();
        nodes[index].feature = best_feature;
        nodes[index].threshold = best_threshold;
        const int l = grow(std::move(left_rows), depth + 1);
        nodes[index].left = l;
        const int r = grow(std::move(right_rows), depth + 1);
        nodes[index].right = r;
        return index;
    }
};

}  // namespace

DecisionTree DecisionTree::fit(const Matrix& features, const std::vector<int>& labels, const std::vector<bool>& mask,
                               std::size_t max_depth) {
    if (labels.size() != features.rows || mask.size() != features.rows) {
        throw std::invalid_argument("DecisionTree::fit: features, labels and mask disagree in length");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) rows.push_back(i);
    }
    if (rows.empty()) throw std::invalid_argument("DecisionTree::fit: no training rows");
    DecisionTree tree;
    Builder b{features, labels, max_depth, tree.nodes_};
    b.grow(std::move(rows), 0);
    return tree;
}

int DecisionTree::predict(std::span<const double> x) const {
    int k = 0;
    while (nodes_[k].feature >= 0) {
        k = x[static_cast<std::size_t>(nodes_[k].feature)] <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
    }
    return nodes_[k].label;
}

std::vector<int> DecisionTree::predict(const Matrix& features) const {
    std::vector<int> out(features.rows);
    for (std::size_t i = 0; i < features.rows; ++i) out[i] = predict(features.row(i));
    return out;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        deepest = std::max(deepest, d[k]);
        if (nodes_[k].feature >= 0) {
            d[static_cast<std::size_t>(nodes_[k].left)] = d[k] + 1;
            d[static_cast<std::size_t>(nodes_[k].right)] = d[k] + 1;
        }
    }
    return deepest;
}

std::size_t DecisionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

Matrix bits_to_features(const cem::BooleanConcept& r) {
    Matrix m(r.size(), r.width);
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t u = 0; u < r.width; ++u) m(i, u) = r.bit(i, u) ? 1.0 : 0.0;
    }
    return m;
}

Matrix one_hot(const std::vector<std::size_t>& ids, std::size_t count) {
    Matrix m(ids.size(), count);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= count) throw std::out_of_range("one_hot: id out of range");
        m(i, ids[i]) = 1.0;
    }
    return m;
}

double concept_completeness(const Matrix& encodings, const std::vector<int>& labels, const std::vector<bool>& train,
                            const std::vector<bool>& test) {
    const DecisionTree tree = DecisionTree::fit(encodings, labels, train);
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (!test[i]) continue;
        ++total;
        if (tree.predict(encodings.row(i)) == labels[i]) ++correct;
    }
    if (total == 0) throw std::invalid_argument("concept_completeness: empty test split");
    return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace cgn::metrics
