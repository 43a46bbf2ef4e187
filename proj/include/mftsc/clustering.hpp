#pragma once

#include "mftsc/fpca.hpp"
#include "mftsc/grid.hpp"
#include "mftsc/panel_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mftsc {

struct ClusterAssignment {
    std::vector<int> labels; // c_i in {1..K}
    int K = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::vector<int>> history; // label vector per iteration
    std::vector<std::string> warnings;
};

struct InitialClusteringConfig {
    int K_max = 0; // 0 selects min(10, I-1)
    int Q_max = 6;
    /// High share so weak but discriminating directions (mean shape, mean
    /// gaps) survive into the scores; Q_max still caps the count.
    double variance_share = 0.99;
    int kmeans_restarts = 25;
    std::uint64_t seed = 0;
};

struct MftscConfig {
    InitialClusteringConfig initial;
    double p1 = 0.9;
    double p2 = 0.9;
    double p3 = 0.9;
    LongRunConfig lr;
    int max_iterations = 50;
    /// Experimentation flag: apply each object's reassignment immediately,
    /// refreshing the affected cluster structures (Gauss-Seidel), instead of
    /// the default batch update from the per-pass snapshot.
    bool sequential_updates = false;
};

/// Subtract the per-object mean curve, divide pointwise by the temporal
/// standard deviation (floored at 1e-8).
Matrix standardize_series(const Matrix& series);

struct CombinedScores {
    std::vector<Matrix> scores; // I matrices, T x Q
    Index q = 1;
    bool degenerate = false;
    EigenSystem basis;
};

/// Pooled static FPCA over all I*T standardized curves; Q components by the
/// variance-share rule capped at Q_max.
CombinedScores combined_fpca_scores(const FTSPanel& panel,
                                    const InitialClusteringConfig& config);

/// argmax over k in {2..K} of d_k^(-I/2) - d_{k-1}^(-I/2); `distortions`
/// holds d_1..d_K. Ties break toward smaller k.
int optimal_cluster_count(const Vector& distortions, Index n_objects);

/// k-means on flattened T*Q score vectors for k = 2..K_max, distortion
/// d_k = WCSS/k, cluster count by the jump rule.
ClusterAssignment initial_clustering(const FTSPanel& panel,
                                     const InitialClusteringConfig& config);

/// Thrown when a leave-one-out fit would leave fewer than two members.
struct SingletonClusterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Panel-model fit of a cluster with one object removed (reference path for
/// the engine used inside reclassification).
PanelModelFit leave_one_out_fit(const FTSPanel& cluster_panel, std::optional<Index> exclude,
                                double p1, double p2, double p3,
                                const LongRunConfig& lr_config);

/// Leave-one-out prediction of every curve of an object from a cluster fit:
/// gamma from the object-vs-cluster mean, (xi, zeta) from the joint
/// projection of each demeaned curve. Returns J x T predictions.
Matrix predict_object(const PanelModelFit& fit, const Matrix& object_series);

/// One batch reclassification pass: leave-one-out fit, predict, mean L2
/// distance, argmin with ties kept at the incumbent. Emptied clusters are
/// dissolved and labels compacted.
ClusterAssignment reclassify_once(const FTSPanel& panel, const ClusterAssignment& assignment,
                                  const MftscConfig& config);

/// Full procedure: initial k-means step, then iterative reclassification
/// until the membership stabilizes (or max_iterations / a revisit cycle).
ClusterAssignment cluster_mftsc(const FTSPanel& panel, const MftscConfig& config);

namespace detail {

/// What a prediction needs from a (possibly leave-one-out) cluster fit.
struct ClusterStructure {
    Vector mu;
    Matrix phi; // J x M
    Matrix rho; // J x N1
    Matrix psi; // J x N2
    Matrix pinv_g;
    bool mean_only = false; // singleton rule: mu only, no KL terms
};

/// Pass-scoped cluster state. Lag weights and bandwidths are frozen when the
/// state is (re)built; membership edits maintain the decomposition and the
/// pooled lag-weighted Gram through exact incremental identities, so both
/// batch and sequential reclassification share one code path.
class MutableCluster {
public:
    MutableCluster(const FTSPanel& panel, std::vector<Index> members, double p1, double p2,
                   double p3, const LongRunConfig& lr_config);

    const std::vector<Index>& members() const { return members_; }
    Index size() const { return static_cast<Index>(members_.size()); }
    double bandwidth_r() const { return h_r_; }
    double bandwidth_u() const { return h_u_; }

    void add(Index object);
    void remove(Index object);

    /// Structure of the full cluster (mean-only when a single member).
    const ClusterStructure& structure() const;
    /// Leave-one-out structure for a current member.
    ClusterStructure structure_without(Index object) const;

private:
    ClusterStructure assemble(const Vector& mu, const Matrix& eta, const Matrix& r,
                              const Matrix& pooled_u, Index n_objects) const;
    Matrix gram_of(Index object) const; // (D_i - R) B_u (D_i - R)^T

    const FTSPanel* panel_;
    double p1_, p2_, p3_;
    Index t_count_;
    double h_r_ = 1.0, h_u_ = 1.0;
    Matrix b_r_, b_u_;          // symmetrized lag-weight matrices
    std::vector<Index> members_;
    Matrix object_means_;       // J x n, column per member
    Matrix y_sum_;              // J x T, running sum of member series
    Matrix gram_sum_;           // sum of member U-level Grams
    mutable std::optional<ClusterStructure> cached_;
};

Matrix predict_with_structure(const Grid& grid, const ClusterStructure& st,
                              const Matrix& object_series);
double prediction_distance(const Grid& grid, const ClusterStructure& st,
                           const Matrix& object_series);

} // namespace detail

} // namespace mftsc
