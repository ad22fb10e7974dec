#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cgn/diff/matrix.hpp"

namespace cgn::metrics {

struct KMeansConfig {
    std::size_t k = 10;
    std::size_t max_iterations = 300;
    std::uint64_t seed = 42;
};

struct KMeansResult {
    std::vector<std::size_t> assignment;
    diff::Matrix centroids;
    /// Within-cluster sum of squares after each Lloyd iteration.
    std::vector<double> objective;
    std::size_t iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing. An emptied cluster is re-seeded at the point farthest from its
/// current centroid.
KMeansResult kmeans(const diff::Matrix& points, const KMeansConfig& cfg);

/// Default k for a dataset id: 10 for the single-community synthetic sets, 30 otherwise.
std::size_t default_k(const std::string& dataset);

}  // namespace cgn::metrics
