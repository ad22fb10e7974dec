#pragma once

#include <span>
#include <vector>

#include "cgn/cem/concepts.hpp"
#include "cgn/diff/matrix.hpp"

namespace cgn::metrics {

/// CART classifier with Gini impurity and axis-aligned threshold splits.
class DecisionTree {
public:
    struct Node {
        /// -1 marks a leaf.
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };

    /// Grows until leaves are pure, unsplittable, or at max_depth. Among the
    /// splits of lowest weighted impurity the lowest feature index and then
    /// the lowest threshold wins; leaves predict their majority class (lowest
    /// label on ties).
    static DecisionTree fit(const diff::Matrix& features, const std::vector<int>& labels, const std::vector<bool>& mask,
                            std::size_t max_depth = 10);

    int predict(std::span<const double> x) const;
    std::vector<int> predict(const diff::Matrix& features) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    std::vector<Node> nodes_;
};

/// 0/1 feature matrix of Boolean concept rows.
diff::Matrix bits_to_features(const cem::BooleanConcept& r);
/// One-hot matrix of cluster ids.
diff::Matrix one_hot(const std::vector<std::size_t>& ids, std::size_t count);

/// Test accuracy of a tree fitted on the train rows.
double concept_completeness(const diff::Matrix& encodings, const std::vector<int>& labels,
                            const std::vector<bool>& train, const std::vector<bool>& test);

}  // namespace cgn::metrics
