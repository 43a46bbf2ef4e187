#pragma once

#include "mftsc/grid.hpp"

#include <optional>
#include <vector>

namespace mftsc {

/// Discretized covariance surface c(u_j, v_k) on a grid.
struct KernelMatrix {
    GridPtr grid;
    Matrix values; // J x J

    void symmetrize() { values = (0.5 * (values + values.transpose())).eval(); }
};

/// Descending nonnegative eigenvalues with grid-orthonormal eigenfunctions
/// (orthonormal under the trapezoidal inner product).
struct EigenSystem {
    GridPtr grid;
    Vector eigenvalues;
    Matrix eigenfunctions; // J x count, one column per eigenvalue

    Index count() const { return eigenvalues.size(); }
    GridFunction eigenfunction(Index m) const {
        return GridFunction(grid, eigenfunctions.col(m));
    }
};

struct LongRunConfig {
    std::optional<double> bandwidth; // h > 0; unset selects via the plug-in
    double flat_top_k = 0.5;
    std::optional<Index> max_lag;    // default T - 2
};

struct BandwidthChoice {
    double h = 1.0;
    bool degenerate = false; // all-equal curves
};

struct ComponentChoice {
    Index count = 1;
    bool degenerate = false; // no positive eigenvalues
};

/// Centered sample autocovariance surface at a signed lag. Columns of
/// `series` are the curves X_1..X_T. Divisor is T - q in both branches.
Matrix autocovariance(const Matrix& series, Index lag);
KernelMatrix autocovariance(const GridPtr& grid, const Matrix& series, Index lag);

/// 1 on [0,k), linear from 1 to 0 on [k,1), 0 beyond; requires 0 < k < 1.
double flat_top_weight(double x, double k);

/// T x T lag-weight matrix B with B(t,s) = K((s-t)/h) / (T-(s-t)),
/// zeroed beyond max_lag; c_hat = X_c B X_c^T sums the weighted
/// autocovariances. Exposed for the clustering fast path.
Matrix lag_weight_matrix(Index t_count, double h, double flat_top_k, Index max_lag);

/// Kernel-weighted sum of autocovariances over |q| <= min(max_lag, T-1),
/// symmetrized.
KernelMatrix long_run_covariance(const GridPtr& grid, const Matrix& series,
                                 const LongRunConfig& config);

/// Simplified plug-in: with pilot h0 = T^(1/5) and trace statistics
/// a_q = |integral of the lag-q autocovariance diagonal|, returns
/// h = clamp(T^(1/3) * sum(|q| w_q a_q) / sum(w_q a_q), 1, 2 T^(1/3)).
/// Degenerate (all-equal) series give h = 1 with the flag set.
BandwidthChoice select_bandwidth(const Grid& grid, const Matrix& series, double flat_top_k);

/// Same plug-in on trace statistics averaged across several series.
BandwidthChoice select_bandwidth_pooled(const Grid& grid,
                                        const std::vector<const Matrix*>& series,
                                        double flat_top_k);

/// Solves the discretized operator eigenproblem for the kernel: symmetric
/// eigensolve of W^(1/2) C W^(1/2) with W the quadrature weights, columns
/// rescaled back so eigenfunctions are trapezoid-orthonormal. Negative
/// eigenvalues are clipped to zero; sign fixed so the entry of largest
/// magnitude is positive.
EigenSystem eigen_decompose(const KernelMatrix& kernel);

/// Eigen-decomposition of (1/divisor) E E^T via the small Gram of E's
/// columns, exact for the nonzero spectrum. Degenerate input falls back to a
/// single zero-eigenvalue constant function.
EigenSystem eigen_from_outer(const GridPtr& grid, const Matrix& curves, double divisor);

/// Eigen-decomposition of sym(Z B Z^T) reduced onto the column space of Z by
/// thin QR; B must be symmetric. Agrees with eigen_decompose of the full
/// J x J surface on the nonzero spectrum.
EigenSystem eigen_from_factored(const GridPtr& grid, const Matrix& z, const Matrix& b_sym);

/// max(smallest count reaching cumulative share P of the positive spectrum,
/// largest count with lambda_1/lambda_M <= sqrt(n)/log10(n)); at least 1.
ComponentChoice select_n_components(const Vector& eigenvalues, double share,
                                    Index n_sample);

/// Scores s_m = <curve, phi_m> for the first n eigenfunctions.
Vector project_scores(const GridFunction& curve, const EigenSystem& basis, Index n);

} // namespace mftsc
