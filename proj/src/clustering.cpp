#include "mftsc/clustering.hpp"

#include "mftsc/kmeans.hpp"
#include "mftsc/rng.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace mftsc {

Matrix standardize_series(const Matrix& series) {
    const Index t_count = series.cols();
    if (t_count < 2) throw std::invalid_argument("standardize_series: needs T >= 2");
    // scalar location/scale so the within-object shape (mean curve included)
    // survives into the combined set; the shape is a clustering feature
    const double level = series.mean();
    const Matrix centered = series.array() - level;
    const double scale = std::max(
        std::sqrt(centered.squaredNorm() / static_cast<double>(centered.size() - 1)), 1e-8);
    return centered / scale;
}

CombinedScores combined_fpca_scores(const FTSPanel& panel,
                                    const InitialClusteringConfig& config) {
    panel.validate();
    const Index i_count = panel.n_objects();
    const Index t_count = panel.n_times();
    const Index j_count = panel.grid->size();
    if (i_count * t_count < config.Q_max)
        throw std::invalid_argument("combined_fpca_scores: fewer curves than Q_max");

    Matrix pooled(j_count, i_count * t_count);
    for (Index i = 0; i < i_count; ++i)
        pooled.middleCols(i * t_count, t_count) =
            standardize_series(panel.series[static_cast<std::size_t>(i)]);
    const Vector pooled_mean = pooled.rowwise().mean();
    pooled.colwise() -= pooled_mean;

    KernelMatrix cov{panel.grid,
                     pooled * pooled.transpose() /
                         static_cast<double>(i_count * t_count - 1)};
    CombinedScores out;
    out.basis = eigen_decompose(cov);

    const Vector& lambda = out.basis.eigenvalues;
    const double total = lambda.sum();
    if (total <= 1e-12 * static_cast<double>(j_count)) {
        out.q = 1;
        out.degenerate = true;
    } else {
        double cum = 0.0;
        Index q = 1;
        for (Index m = 0; m < lambda.size(); ++m) {
            cum += lambda(m);
            q = m + 1;
            if (cum / total >= config.variance_share - 1e-12) break;
        }
        out.q = std::min<Index>(q, config.Q_max);
    }

    const Matrix projector = out.basis.eigenfunctions.leftCols(out.q).transpose() *
                             panel.grid->quad_weights().asDiagonal();
    out.scores.reserve(static_cast<std::size_t>(i_count));
    for (Index i = 0; i < i_count; ++i) {
        const Matrix std_curves =
            standardize_series(panel.series[static_cast<std::size_t>(i)]).colwise() -
            pooled_mean;
        out.scores.push_back((projector * std_curves).transpose()); // T x Q
    }
    return out;
}

int optimal_cluster_count(const Vector& distortions, Index n_objects) {
    const Index k_max = distortions.size();
    if (k_max < 2) throw std::invalid_argument("optimal_cluster_count: needs d_1..d_K, K >= 2");
    for (Index k = 0; k < k_max; ++k)
        if (!(distortions(k) > 0.0))
            throw std::invalid_argument("optimal_cluster_count: nonpositive distortion");

    // normalize by the smallest distortion so the negative-power transform
    // stays in (0,1]; the argmax is invariant under rescaling
    const double d_ref = distortions.minCoeff();
    const double p = static_cast<double>(n_objects) / 2.0;
    Vector transformed(k_max);
    for (Index k = 0; k < k_max; ++k)
        transformed(k) = std::exp(-p * std::log(distortions(k) / d_ref));

    int best_k = 2;
    double best_jump = transformed(1) - transformed(0);
    for (Index k = 2; k < k_max; ++k) {
        const double jump = transformed(k) - transformed(k - 1);
        // ties (within rounding) break toward smaller k
        if (jump > best_jump + 1e-9 * std::max(1.0, std::abs(best_jump))) {
            best_jump = jump;
            best_k = static_cast<int>(k) + 1;
        }
    }
    return best_k;
}

ClusterAssignment initial_clustering(const FTSPanel& panel,
                                     const InitialClusteringConfig& config) {
    panel.validate();
    const Index i_count = panel.n_objects();
    if (i_count < 3) throw std::invalid_argument("initial_clustering: needs I >= 3");

    const CombinedScores combined = combined_fpca_scores(panel, config);
    const Index dim = combined.scores.front().size();
    Matrix points(i_count, dim);
    for (Index i = 0; i < i_count; ++i) {
        const Matrix& s = combined.scores[static_cast<std::size_t>(i)];
        points.row(i) = Eigen::Map<const Vector>(s.data(), dim).transpose();
    }

    ClusterAssignment out;
    if (combined.degenerate) out.warnings.push_back("degenerate pooled covariance; Q = 1");

    const int k_max = std::min<int>(config.K_max > 0 ? config.K_max : 10,
                                    static_cast<int>(i_count) - 1);
    const Vector grand = points.colwise().mean();
    const double total_ss = (points.rowwise() - grand.transpose()).squaredNorm();

    std::vector<std::vector<int>> labels_by_k(static_cast<std::size_t>(k_max) + 1);
    Vector distortions(k_max);
    distortions(0) = total_ss;
    for (int k = 2; k <= k_max; ++k) {
        const KMeansResult km =
            kmeans(points, k, config.kmeans_restarts,
                   substream(config.seed, static_cast<std::uint64_t>(k)));
        distortions(k - 1) = km.wcss;
        labels_by_k[static_cast<std::size_t>(k)] = km.labels;
    }

    int k_opt = 2;
    const double scale = std::max(1.0, total_ss / static_cast<double>(i_count));
    if (distortions(0) <= 1e-12 * scale || (k_max >= 2 && distortions(1) <= 1e-15 * scale)) {
        // all objects (near-)identical; any split is as good as any other
        out.warnings.push_back("degenerate distortions; defaulting to K = 2");
    } else {
        k_opt = optimal_cluster_count(distortions, i_count);
    }

    out.K = k_opt;
    out.labels.resize(static_cast<std::size_t>(i_count));
    for (Index i = 0; i < i_count; ++i)
        out.labels[static_cast<std::size_t>(i)] =
            labels_by_k[static_cast<std::size_t>(k_opt)][static_cast<std::size_t>(i)] + 1;
    out.iterations = 0;
    out.converged = false;
    out.history.push_back(out.labels);
    return out;
}

PanelModelFit leave_one_out_fit(const FTSPanel& cluster_panel, std::optional<Index> exclude,
                                double p1, double p2, double p3,
                                const LongRunConfig& lr_config) {
    cluster_panel.validate();
    const Index i_count = cluster_panel.n_objects();
    if (exclude && (*exclude < 0 || *exclude >= i_count))
        throw std::invalid_argument("leave_one_out_fit: exclude index out of range");
    if (!exclude) {
        if (i_count < 2) throw SingletonClusterError("cluster has a single member");
        return fit_panel_model(cluster_panel, p1, p2, p3, lr_config);
    }
    if (i_count - 1 < 2)
        throw SingletonClusterError("cluster reduced to a single member after exclusion");
    FTSPanel subset;
    subset.grid = cluster_panel.grid;
    for (Index i = 0; i < i_count; ++i) {
        if (i == *exclude) continue;
        subset.labels.push_back(cluster_panel.labels[static_cast<std::size_t>(i)]);
        subset.series.push_back(cluster_panel.series[static_cast<std::size_t>(i)]);
    }
    return fit_panel_model(subset, p1, p2, p3, lr_config);
}

namespace detail {

Matrix predict_with_structure(const Grid& grid, const ClusterStructure& st,
                              const Matrix& object_series) {
    const Index t_count = object_series.cols();
    if (st.mean_only) return st.mu.replicate(1, t_count);
    const Vector& w = grid.quad_weights();
    const Vector ybar = object_series.rowwise().mean();
    const Vector gamma = st.phi.transpose() * w.cwiseProduct(ybar - st.mu);
    // demean by the cluster model's estimate of the object mean (mu + the
    // eta-basis reconstruction), not the raw object mean: the raw-mean
    // variant hands every object a free location parameter and lets small
    // clusters specialize on finite-sample mean offsets
    const Vector model_mean = st.mu + st.phi * gamma;
    const Matrix demeaned = object_series.colwise() - model_mean;
    const Index n1 = st.rho.cols();
    const Index n2 = st.psi.cols();
    Matrix ab(n1 + n2, t_count);
    ab.topRows(n1) = st.rho.transpose() * (demeaned.array().colwise() * w.array()).matrix();
    ab.bottomRows(n2) = st.psi.transpose() * (demeaned.array().colwise() * w.array()).matrix();
    const Matrix beta = st.pinv_g * ab;
    Matrix pred = (st.mu + st.phi * gamma).replicate(1, t_count);
    pred += st.rho * beta.topRows(n1);
    pred += st.psi * beta.bottomRows(n2);
    return pred;
}

double prediction_distance(const Grid& grid, const ClusterStructure& st,
                           const Matrix& object_series) {
    const Matrix pred = predict_with_structure(grid, st, object_series);
    const Matrix diff = object_series - pred;
    const Vector& w = grid.quad_weights();
    double acc = 0.0;
    for (Index t = 0; t < diff.cols(); ++t)
        acc += std::sqrt(std::max(0.0, diff.col(t).cwiseProduct(diff.col(t)).dot(w)));
    return acc / static_cast<double>(diff.cols());
}

MutableCluster::MutableCluster(const FTSPanel& panel, std::vector<Index> members, double p1,
                               double p2, double p3, const LongRunConfig& lr_config)
    : panel_(&panel), p1_(p1), p2_(p2), p3_(p3), members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("MutableCluster: empty member list");
    t_count_ = panel.n_times();
    const Index j_count = panel.grid->size();
    const Index n = size();

    object_means_.resize(j_count, n);
    y_sum_ = Matrix::Zero(j_count, t_count_);
    for (Index m = 0; m < n; ++m) {
        const Matrix& y = panel.series[static_cast<std::size_t>(members_[m])];
        object_means_.col(m) = y.rowwise().mean();
        y_sum_ += y;
    }

    // bandwidths and lag weights frozen for the lifetime of this state
    const double k = lr_config.flat_top_k;
    const Index max_lag = lr_config.max_lag.value_or(t_count_ - 2);
    if (n >= 2) {
        const Vector mu = object_means_.rowwise().mean();
        const Matrix r = (y_sum_ / static_cast<double>(n)).colwise() - mu;
        if (lr_config.bandwidth) {
            h_r_ = h_u_ = *lr_config.bandwidth;
        } else if (t_count_ >= 8) {
            h_r_ = select_bandwidth(*panel.grid, r, k).h;
            std::vector<Matrix> u;
            std::vector<const Matrix*> views;
            u.reserve(members_.size());
            for (Index m = 0; m < n; ++m) {
                Matrix ui = panel.series[static_cast<std::size_t>(members_[m])];
                ui.colwise() -= object_means_.col(m);
                ui -= r;
                u.push_back(std::move(ui));
                views.push_back(&u.back());
            }
            h_u_ = select_bandwidth_pooled(*panel.grid, views, k).h;
        } else {
            h_r_ = h_u_ = 1.0;
        }
    }
    Matrix b = lag_weight_matrix(t_count_, h_r_, k, max_lag);
    b_r_ = 0.5 * (b + b.transpose());
    b = lag_weight_matrix(t_count_, h_u_, k, max_lag);
    b_u_ = 0.5 * (b + b.transpose());

    gram_sum_ = Matrix::Zero(j_count, j_count);
    for (Index m = 0; m < n; ++m) gram_sum_ += gram_of(members_[m]);
}

Matrix MutableCluster::gram_of(Index object) const {
    const Index n = size();
    const Matrix& y = panel_->series[static_cast<std::size_t>(object)];
    const Vector own_mean = y.rowwise().mean();
    const Vector mu = object_means_.rowwise().mean();
    // U_i = (Y_i - ybar_i 1') - R with R = y_sum/n - mu 1'
    Matrix u = y;
    u.colwise() -= own_mean;
    u -= (y_sum_ / static_cast<double>(n)).colwise() - mu;
    return u * b_u_ * u.transpose();
}

void MutableCluster::add(Index object) {
    cached_.reset();
    const Index n = size();
    const Matrix& y = panel_->series[static_cast<std::size_t>(object)];
    const Vector own_mean = y.rowwise().mean();
    // V = (Y_a - ybar_a 1') - R in the pre-add frame; the pooled Gram gains
    // n/(n+1) V B V' (members' U curves all shift by V/(n+1))
    Matrix v = y;
    v.colwise() -= own_mean;
    v -= (y_sum_ / static_cast<double>(n)).colwise() - object_means_.rowwise().mean().eval();
    gram_sum_ += (static_cast<double>(n) / static_cast<double>(n + 1)) *
                 (v * b_u_ * v.transpose());

    object_means_.conservativeResize(Eigen::NoChange, n + 1);
    object_means_.col(n) = own_mean;
    y_sum_ += y;
    members_.push_back(object);
}

void MutableCluster::remove(Index object) {
    cached_.reset();
    const Index n = size();
    if (n < 2) throw std::invalid_argument("MutableCluster: cannot remove the last member");
    const auto it = std::find(members_.begin(), members_.end(), object);
    if (it == members_.end())
        throw std::invalid_argument("MutableCluster: object is not a member");
    const Index pos = static_cast<Index>(it - members_.begin());

    // inverse of add(): the pooled Gram loses n/(n-1) G_object
    gram_sum_ -= (static_cast<double>(n) / static_cast<double>(n - 1)) * gram_of(object);

    const Matrix& y = panel_->series[static_cast<std::size_t>(object)];
    y_sum_ -= y;
    members_.erase(it);
    if (pos != n - 1) object_means_.col(pos) = object_means_.col(n - 1);
    object_means_.conservativeResize(Eigen::NoChange, n - 1);
    // keep member order aligned with object_means_ columns
    if (pos != n - 1) std::swap(members_[static_cast<std::size_t>(pos)], members_.back());
}

ClusterStructure MutableCluster::assemble(const Vector& mu, const Matrix& eta,
                                          const Matrix& r, const Matrix& pooled_u,
                                          Index n_objects) const {
    const GridPtr& grid = panel_->grid;
    const EigenSystem eta_sys =
        eigen_from_outer(grid, eta, static_cast<double>(std::max<Index>(n_objects - 1, 1)));
    const EigenSystem r_sys = eigen_from_factored(grid, r, b_r_);
    KernelMatrix c_u{grid, pooled_u};
    c_u.symmetrize();
    const EigenSystem u_sys = eigen_decompose(c_u);

    ClusterStructure st;
    st.mu = mu;
    const Index m = std::min(select_n_components(eta_sys.eigenvalues, p1_,
                                                 std::max<Index>(n_objects, 2))
                                 .count,
                             eta_sys.count());
    const Index n1 =
        std::min(select_n_components(r_sys.eigenvalues, p2_, t_count_).count, r_sys.count());
    const Index n2 = std::min(select_n_components(u_sys.eigenvalues, p3_,
                                                  std::max<Index>(n_objects, 2) * t_count_)
                                  .count,
                              u_sys.count());
    st.phi = eta_sys.eigenfunctions.leftCols(m);
    st.rho = r_sys.eigenfunctions.leftCols(n1);
    st.psi = u_sys.eigenfunctions.leftCols(n2);
    const Matrix q = cross_basis_matrix(*grid, st.rho, st.psi);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked_cross_gram(q));
    st.pinv_g = cod.pseudoInverse();
    return st;
}

const ClusterStructure& MutableCluster::structure() const {
    if (cached_) return *cached_;
    const Index n = size();
    if (n == 1) {
        ClusterStructure st;
        st.mean_only = true;
        st.mu = object_means_.col(0);
        cached_ = std::move(st);
        return *cached_;
    }
    const Vector mu = object_means_.rowwise().mean();
    const Matrix eta = object_means_.colwise() - mu;
    const Matrix r = (y_sum_ / static_cast<double>(n)).colwise() - mu;
    cached_ = assemble(mu, eta, r, gram_sum_ / static_cast<double>(n), n);
    return *cached_;
}

ClusterStructure MutableCluster::structure_without(Index object) const {
    const Index n = size();
    const auto it = std::find(members_.begin(), members_.end(), object);
    if (it == members_.end())
        throw std::invalid_argument("MutableCluster: object is not a member");
    if (n == 1) {
        // no data left behind; fall back to the lone member's mean
        ClusterStructure st;
        st.mean_only = true;
        st.mu = object_means_.col(0);
        return st;
    }
    const Index pos = static_cast<Index>(it - members_.begin());
    if (n == 2) {
        ClusterStructure st;
        st.mean_only = true;
        st.mu = object_means_.col(1 - pos);
        return st;
    }

    const double shrink = 1.0 / static_cast<double>(n - 1);
    const Vector mu_full = object_means_.rowwise().mean();
    const Vector mu = (static_cast<double>(n) * mu_full - object_means_.col(pos)) * shrink;

    Matrix eta(object_means_.rows(), n - 1);
    const Vector eta_excl = object_means_.col(pos) - mu_full;
    Index at = 0;
    for (Index m = 0; m < n; ++m) {
        if (m == pos) continue;
        eta.col(at++) = (object_means_.col(m) - mu_full) + shrink * eta_excl;
    }

    const Matrix& y = panel_->series[static_cast<std::size_t>(object)];
    const Matrix r_full = (y_sum_ / static_cast<double>(n)).colwise() - mu_full;
    Matrix u = y;
    u.colwise() -= object_means_.col(pos);
    u -= r_full;
    const Matrix r = r_full - shrink * u;

    const Matrix pooled =
        (gram_sum_ - (static_cast<double>(n) * shrink) * (u * b_u_ * u.transpose())) *
        shrink * shrink * static_cast<double>(n - 1); // (S - n/(n-1) G) / (n-1)

    return assemble(mu, eta, r, pooled, n - 1);
}

} // namespace detail

Matrix predict_object(const PanelModelFit& fit, const Matrix& object_series) {
    if (object_series.rows() != fit.grid->size())
        throw std::invalid_argument("predict_object: object off the fit grid");
    detail::ClusterStructure st;
    st.mu = fit.decomposition.mu.values;
    st.phi = fit.eta_basis.eigenfunctions.leftCols(fit.m);
    st.rho = fit.r_basis.eigenfunctions.leftCols(fit.n1);
    st.psi = fit.u_basis.eigenfunctions.leftCols(fit.n2);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked_cross_gram(fit.q));
    st.pinv_g = cod.pseudoInverse();
    return detail::predict_with_structure(*fit.grid, st, object_series);
}

namespace {

using detail::ClusterStructure;
using detail::MutableCluster;

struct PassOutcome {
    std::vector<int> labels;
    int k = 0;
    double total_distance = 0.0;
    std::vector<std::string> warnings;
};

std::vector<std::vector<Index>> members_by_cluster(const std::vector<int>& labels, int k) {
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int c = labels[i];
        if (c < 1 || c > k) throw std::invalid_argument("cluster label out of range");
        members[static_cast<std::size_t>(c - 1)].push_back(static_cast<Index>(i));
    }
    return members;
}

// compact labels after any cluster emptied, preserving ascending order
void dissolve_empty(PassOutcome& out, int k) {
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (const int c : out.labels) ++counts[static_cast<std::size_t>(c - 1)];
    std::vector<int> remap(static_cast<std::size_t>(k), 0);
    int next = 0;
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
            remap[static_cast<std::size_t>(c)] = ++next;
        } else {
            out.warnings.push_back("cluster " + std::to_string(c + 1) +
                                   " emptied and dissolved");
        }
    }
    for (auto& c : out.labels) c = remap[static_cast<std::size_t>(c - 1)];
    out.k = next;
}

// one batch pass: distances against the snapshot structures, simultaneous update
PassOutcome run_pass_batch(const FTSPanel& panel, const std::vector<int>& labels, int k,
                           const MftscConfig& config) {
    const Index i_count = panel.n_objects();
    const auto members = members_by_cluster(labels, k);

    std::vector<std::optional<MutableCluster>> clusters(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        if (!members[static_cast<std::size_t>(c)].empty())
            clusters[static_cast<std::size_t>(c)].emplace(panel,
                                                          members[static_cast<std::size_t>(c)],
                                                          config.p1, config.p2, config.p3,
                                                          config.lr);

    PassOutcome out;
    out.labels.assign(static_cast<std::size_t>(i_count), 0);
    for (Index i = 0; i < i_count; ++i) {
        const int incumbent = labels[static_cast<std::size_t>(i)];
        const auto distance_to = [&](int c) {
            const auto& cluster = *clusters[static_cast<std::size_t>(c - 1)];
            const ClusterStructure st = c == incumbent
                                            ? cluster.structure_without(i)
                                            : cluster.structure();
            return detail::prediction_distance(*panel.grid, st,
                                               panel.series[static_cast<std::size_t>(i)]);
        };
        // incumbent wins ties: others must be strictly closer
        int best_c = incumbent;
        double best_d = distance_to(incumbent);
        for (int c = 1; c <= k; ++c) {
            if (c == incumbent || !clusters[static_cast<std::size_t>(c - 1)]) continue;
            const double d = distance_to(c);
            if (d < best_d) {
                best_d = d;
                best_c = c;
            }
        }
        out.labels[static_cast<std::size_t>(i)] = best_c;
        out.total_distance += best_d;
    }
    dissolve_empty(out, k);
    return out;
}

// one sequential sweep: moves apply immediately and the affected cluster
// states are updated in place
PassOutcome run_pass_sequential(const FTSPanel& panel, const std::vector<int>& labels, int k,
                                const MftscConfig& config) {
    const Index i_count = panel.n_objects();
    const auto members = members_by_cluster(labels, k);

    std::vector<std::optional<MutableCluster>> clusters(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        if (!members[static_cast<std::size_t>(c)].empty())
            clusters[static_cast<std::size_t>(c)].emplace(panel,
                                                          members[static_cast<std::size_t>(c)],
                                                          config.p1, config.p2, config.p3,
                                                          config.lr);

    std::vector<int> current = labels;
    PassOutcome out;
    out.total_distance = 0.0;
    for (Index i = 0; i < i_count; ++i) {
        const int incumbent = current[static_cast<std::size_t>(i)];
        int best_c = incumbent;
        double best_d = detail::prediction_distance(
            *panel.grid,
            clusters[static_cast<std::size_t>(incumbent - 1)]->structure_without(i),
            panel.series[static_cast<std::size_t>(i)]);
        for (int c = 1; c <= k; ++c) {
            if (c == incumbent || !clusters[static_cast<std::size_t>(c - 1)]) continue;
            const double d = detail::prediction_distance(
                *panel.grid, clusters[static_cast<std::size_t>(c - 1)]->structure(),
                panel.series[static_cast<std::size_t>(i)]);
            if (d < best_d) {
                best_d = d;
                best_c = c;
            }
        }
        out.total_distance += best_d;
        if (best_c != incumbent) {
            auto& donor = clusters[static_cast<std::size_t>(incumbent - 1)];
            if (donor->size() == 1)
                donor.reset(); // dissolved; labels compacted below
            else
                donor->remove(i);
            clusters[static_cast<std::size_t>(best_c - 1)]->add(i);
            current[static_cast<std::size_t>(i)] = best_c;
        }
    }
    out.labels = std::move(current);
    dissolve_empty(out, k);
    return out;
}

PassOutcome run_pass(const FTSPanel& panel, const std::vector<int>& labels, int k,
                     const MftscConfig& config) {
    return config.sequential_updates ? run_pass_sequential(panel, labels, k, config)
                                     : run_pass_batch(panel, labels, k, config);
}

} // namespace

ClusterAssignment reclassify_once(const FTSPanel& panel, const ClusterAssignment& assignment,
                                  const MftscConfig& config) {
    panel.validate();
    if (static_cast<Index>(assignment.labels.size()) != panel.n_objects())
        throw std::invalid_argument("reclassify_once: label count mismatch");
    ClusterAssignment out = assignment;
    out.iterations = assignment.iterations + 1;
    if (assignment.K <= 1) { // no alternative clusters to move to
        out.converged = true;
        out.history.push_back(out.labels);
        return out;
    }

    PassOutcome pass = run_pass(panel, assignment.labels, assignment.K, config);
    out.labels = pass.labels;
    out.K = pass.k;
    out.warnings.insert(out.warnings.end(), pass.warnings.begin(), pass.warnings.end());
    out.converged = out.labels == assignment.labels;
    out.history.push_back(out.labels);
    return out;
}

ClusterAssignment cluster_mftsc(const FTSPanel& panel, const MftscConfig& config) {
    panel.validate();
    if (panel.n_objects() < 3 || panel.n_times() < 4)
        throw std::invalid_argument("cluster_mftsc: needs I >= 3 and T >= 4");

    ClusterAssignment cur = initial_clustering(panel, config.initial);
    std::set<std::vector<int>> seen;
    seen.insert(cur.labels);

    std::vector<int> best_labels = cur.labels;
    int best_k = cur.K;
    double best_distance = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        if (cur.K <= 1) {
            cur.converged = true;
            break;
        }
        PassOutcome pass = run_pass(panel, cur.labels, cur.K, config);
        cur.iterations = iter;
        cur.warnings.insert(cur.warnings.end(), pass.warnings.begin(), pass.warnings.end());
        if (pass.total_distance < best_distance) {
            best_distance = pass.total_distance;
            best_labels = pass.labels;
            best_k = pass.k;
        }
        if (pass.labels == cur.labels) {
            cur.converged = true;
            cur.history.push_back(pass.labels);
            break;
        }
        if (seen.count(pass.labels) > 0) {
            cur.warnings.push_back("assignment cycle detected; halting");
            cur.history.push_back(pass.labels);
            cur.converged = false;
            cur.labels = best_labels;
            cur.K = best_k;
            return cur;
        }
        seen.insert(pass.labels);
        cur.history.push_back(pass.labels);
        cur.labels = pass.labels;
        cur.K = pass.k;
        if (iter == config.max_iterations) {
            cur.warnings.push_back("max iterations reached without convergence");
            cur.converged = false;
            cur.labels = best_labels;
            cur.K = best_k;
        }
    }
    return cur;
}

} // namespace mftsc
