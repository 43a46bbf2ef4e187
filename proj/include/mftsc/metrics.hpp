#pragma once

#include <vector>

namespace mftsc {

/// Fraction of objects matching under the best one-to-one relabeling of
/// predicted clusters onto true clusters (exhaustive for up to 6 labels,
/// Hungarian assignment beyond).
double correct_classification_rate(const std::vector<int>& pred, const std::vector<int>& truth);

/// Chance-corrected partition similarity from the contingency table;
/// 1 for identical partitions, expected 0 under random assignment.
double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth);

/// Maximum-total-weight assignment on a square score matrix (returns the
/// column assigned to each row). O(n^3) Hungarian method.
std::vector<int> max_assignment(const std::vector<std::vector<double>>& score);

} // namespace mftsc
