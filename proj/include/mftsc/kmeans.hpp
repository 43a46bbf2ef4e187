#pragma once

#include "mftsc/grid.hpp"

#include <cstdint>
#include <vector>

namespace mftsc {

struct KMeansResult {
    std::vector<int> labels; // 0-based cluster ids
    double wcss = 0.0;       // total within-cluster sum of squares
    Matrix centers;          // k x D
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by WCSS.
/// Deterministic for a fixed seed.
KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed,
                    int max_iter = 100);

/// Ward-linkage agglomerative clustering cut at k clusters (0-based labels).
std::vector<int> ward_cluster(const Matrix& points, int k);

} // namespace mftsc
