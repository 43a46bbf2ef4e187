#include "mftsc/kmeans.hpp"

#include "mftsc/rng.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace mftsc {

namespace {

double sq_dist(const Matrix& points, Index i, const Matrix& centers, Index c) {
    return (points.row(i) - centers.row(c)).squaredNorm();
}

Matrix seed_plusplus(const Matrix& points, int k, std::mt19937_64& rng) {
    const Index n = points.rows();
    Matrix centers(k, points.cols());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Vector d2(n);
    for (Index i = 0; i < n; ++i) d2(i) = sq_dist(points, i, centers, 0);
    for (int c = 1; c < k; ++c) {
        const double total = d2.sum();
        Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            for (Index i = 0; i < n; ++i) {
                target -= d2(i);
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(c) = points.row(chosen);
        for (Index i = 0; i < n; ++i)
            d2(i) = std::min(d2(i), sq_dist(points, i, centers, c));
    }
    return centers;
}

} // namespace

KMeansResult kmeans(const Matrix& points, int k, int restarts, std::uint64_t seed,
                    int max_iter) {
    const Index n = points.rows();
    if (k < 1 || n < k) throw std::invalid_argument("kmeans: needs k in [1, n]");
    if (restarts < 1) restarts = 1;

    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        auto rng = make_rng(substream(seed, static_cast<std::uint64_t>(r)));
        Matrix centers = seed_plusplus(points, k, rng);
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        for (int iter = 0; iter < max_iter; ++iter) {
            bool changed = false;
            for (Index i = 0; i < n; ++i) {
                int arg = 0;
                double bestd = sq_dist(points, i, centers, 0);
                for (int c = 1; c < k; ++c) {
                    const double d = sq_dist(points, i, centers, c);
                    if (d < bestd) {
                        bestd = d;
                        arg = c;
                    }
                }
                if (labels[static_cast<std::size_t>(i)] != arg) {
                    labels[static_cast<std::size_t>(i)] = arg;
                    changed = true;
                }
            }
            centers.setZero();
            std::vector<Index> counts(static_cast<std::size_t>(k), 0);
            for (Index i = 0; i < n; ++i) {
                centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
                ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] > 0) {
                    centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
                } else {
                    // revive an empty cluster at the point farthest from its center
                    Index far = 0;
                    double fard = -1.0;
                    for (Index i = 0; i < n; ++i) {
                        const double d =
                            sq_dist(points, i, centers, labels[static_cast<std::size_t>(i)]);
                        if (d > fard) {
                            fard = d;
                            far = i;
                        }
                    }
                    centers.row(c) = points.row(far);
                    labels[static_cast<std::size_t>(far)] = c;
                    changed = true;
                }
            }
            if (!changed) break;
        }
        double wcss = 0.0;
        for (Index i = 0; i < n; ++i)
            wcss += sq_dist(points, i, centers, labels[static_cast<std::size_t>(i)]);
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.labels = labels;
            best.centers = centers;
        }
    }
    return best;
}

std::vector<int> ward_cluster(const Matrix& points, int k) {
    const Index n = points.rows();
    if (k < 1 || n < k) throw std::invalid_argument("ward_cluster: needs k in [1, n]");

    struct Node {
        Vector centroid;
        Index size;
        bool alive;
        std::vector<Index> members;
    };
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        nodes.push_back({points.row(i).transpose(), 1, true, {i}});

    auto ward_d = [&](const Node& a, const Node& b) {
        const double na = static_cast<double>(a.size);
        const double nb = static_cast<double>(b.size);
        return na * nb / (na + nb) * (a.centroid - b.centroid).squaredNorm();
    };

    Index alive = n;
    while (alive > k) {
        double bestd = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!nodes[i].alive) continue;
            for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                if (!nodes[j].alive) continue;
                const double d = ward_d(nodes[i], nodes[j]);
                if (d < bestd) {
                    bestd = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        Node& a = nodes[bi];
        Node& b = nodes[bj];
        a.centroid = (static_cast<double>(a.size) * a.centroid +
                      static_cast<double>(b.size) * b.centroid) /
                     static_cast<double>(a.size + b.size);
        a.size += b.size;
        a.members.insert(a.members.end(), b.members.begin(), b.members.end());
        b.alive = false;
        --alive;
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    int next = 0;
    for (const auto& node : nodes) {
        if (!node.alive) continue;
        for (const Index m : node.members) labels[static_cast<std::size_t>(m)] = next;
        ++next;
    }
    return labels;
}

} // namespace mftsc
