#include "mftsc/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace mftsc {

namespace {

// contingency counts with compacted label indices
std::vector<std::vector<double>> contingency(const std::vector<int>& pred,
                                             const std::vector<int>& truth,
                                             std::size_t& n_pred, std::size_t& n_truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("label vectors have different lengths");
    if (pred.empty()) throw std::invalid_argument("empty label vectors");
    std::map<int, std::size_t> pmap, tmap;
    for (const int p : pred) pmap.emplace(p, pmap.size());
    for (const int t : truth) tmap.emplace(t, tmap.size());
    n_pred = pmap.size();
    n_truth = tmap.size();
    std::vector<std::vector<double>> table(n_pred, std::vector<double>(n_truth, 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i)
        table[pmap[pred[i]]][tmap[truth[i]]] += 1.0;
    return table;
}

} // namespace

std::vector<int> max_assignment(const std::vector<std::vector<double>>& score) {
    const int n = static_cast<int>(score.size());
    const double inf = std::numeric_limits<double>::infinity();
    // Hungarian method with potentials on the negated (minimization) matrix.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = -score[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double correct_classification_rate(const std::vector<int>& pred,
                                   const std::vector<int>& truth) {
    std::size_t n_pred = 0, n_truth = 0;
    const auto table = contingency(pred, truth, n_pred, n_truth);
    const std::size_t s = std::max(n_pred, n_truth);
    std::vector<std::vector<double>> square(s, std::vector<double>(s, 0.0));
    for (std::size_t i = 0; i < n_pred; ++i)
        for (std::size_t j = 0; j < n_truth; ++j) square[i][j] = table[i][j];

    double matched = 0.0;
    if (s <= 6) {
        std::vector<std::size_t> perm(s);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double total = 0.0;
            for (std::size_t i = 0; i < s; ++i) total += square[i][perm[i]];
            matched = std::max(matched, total);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        const auto assign = max_assignment(square);
        for (std::size_t i = 0; i < s; ++i)
            matched += square[i][static_cast<std::size_t>(assign[i])];
    }
    return matched / static_cast<double>(pred.size());
}

double adjusted_rand_index(const std::vector<int>& pred, const std::vector<int>& truth) {
    std::size_t n_pred = 0, n_truth = 0;
    const auto table = contingency(pred, truth, n_pred, n_truth);
    const double n = static_cast<double>(pred.size());
    const auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };

    double sum_cells = 0.0;
    std::vector<double> row_sums(n_pred, 0.0), col_sums(n_truth, 0.0);
    for (std::size_t i = 0; i < n_pred; ++i)
        for (std::size_t j = 0; j < n_truth; ++j) {
            sum_cells += choose2(table[i][j]);
            row_sums[i] += table[i][j];
            col_sums[j] += table[i][j];
        }
    double sum_rows = 0.0, sum_cols = 0.0;
    for (const double r : row_sums) sum_rows += choose2(r);
    for (const double c : col_sums) sum_cols += choose2(c);

    const double expected = sum_rows * sum_cols / choose2(n);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    const double denom = maximum - expected;
    if (denom == 0.0) return sum_cells == expected ? 1.0 : 0.0;
    return (sum_cells - expected) / denom;
}

} // namespace mftsc
