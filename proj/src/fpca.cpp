#include "mftsc/fpca.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mftsc {

Matrix autocovariance(const Matrix& series, Index lag) {
    const Index t_count = series.cols();
    if (std::abs(lag) >= t_count)
        throw std::invalid_argument("autocovariance: |lag| must be < T");
    const Vector mean = series.rowwise().mean();
    const Matrix centered = series.colwise() - mean;
    const Index q = std::abs(lag);
    const Index len = t_count - q;
    Matrix cov;
    if (lag >= 0)
        cov = centered.leftCols(len) * centered.rightCols(len).transpose();
    else
        cov = centered.rightCols(len) * centered.leftCols(len).transpose();
    cov /= static_cast<double>(t_count - lag);
    return cov;
}

KernelMatrix autocovariance(const GridPtr& grid, const Matrix& series, Index lag) {
    if (!grid || series.rows() != grid->size())
        throw std::invalid_argument("autocovariance: series off the grid");
    return KernelMatrix{grid, autocovariance(series, lag)};
}

double flat_top_weight(double x, double k) {
    if (!(k > 0.0 && k < 1.0))
        throw std::invalid_argument("flat_top_weight: k must be in (0,1)");
    const double ax = std::abs(x);
    if (ax < k) return 1.0;
    if (ax < 1.0) return (ax - 1.0) / (k - 1.0);
    return 0.0;
}

Matrix lag_weight_matrix(Index t_count, double h, double flat_top_k, Index max_lag) {
    if (!(h > 0.0)) throw std::invalid_argument("lag_weight_matrix: bandwidth must be > 0");
    Matrix b = Matrix::Zero(t_count, t_count);
    const Index q_cap = std::min<Index>(max_lag, t_count - 1);
    for (Index q = -q_cap; q <= q_cap; ++q) {
        const double w = flat_top_weight(static_cast<double>(q) / h, flat_top_k);
        if (w == 0.0) continue;
        const double v = w / static_cast<double>(t_count - q);
        for (Index t = std::max<Index>(0, -q); t < std::min(t_count, t_count - q); ++t)
            b(t, t + q) = v;
    }
    return b;
}

KernelMatrix long_run_covariance(const GridPtr& grid, const Matrix& series,
                                 const LongRunConfig& config) {
    if (!grid || series.rows() != grid->size())
        throw std::invalid_argument("long_run_covariance: series off the grid");
    const Index t_count = series.cols();
    if (t_count < 4) throw std::invalid_argument("long_run_covariance: needs T >= 4");
    double h;
    if (config.bandwidth) {
        h = *config.bandwidth;
        if (!(h > 0.0)) throw std::invalid_argument("long_run_covariance: bandwidth <= 0");
    } else {
        // plug-in needs a minimal sample; short series fall back to lag 0 only
        h = t_count >= 8 ? select_bandwidth(*grid, series, config.flat_top_k).h : 1.0;
    }
    const Index max_lag = config.max_lag.value_or(t_count - 2);
    const Matrix b = lag_weight_matrix(t_count, h, config.flat_top_k, max_lag);
    const Vector mean = series.rowwise().mean();
    const Matrix centered = series.colwise() - mean;
    KernelMatrix kernel{grid, centered * b * centered.transpose()};
    kernel.symmetrize();
    return kernel;
}

namespace {

// |trapezoid integral of the lag-q autocovariance diagonal|, without forming
// the J x J surface.
double lag_trace(const Grid& grid, const Matrix& centered, Index q) {
    const Index t_count = centered.cols();
    const Vector& w = grid.quad_weights();
    double acc = 0.0;
    for (Index t = 0; t + q < t_count; ++t)
        acc += centered.col(t).cwiseProduct(centered.col(t + q)).dot(w);
    return acc / static_cast<double>(t_count - q);
}

BandwidthChoice plugin_bandwidth(double t_count, const Vector& traces, double flat_top_k) {
    const double a0 = std::abs(traces(0));
    const double scale = traces.cwiseAbs().maxCoeff();
    if (a0 <= 1e-14 * std::max(1.0, scale) || scale <= 0.0) return {1.0, true};
    const double h0 = std::pow(t_count, 0.2);
    double num = 0.0;
    double den = a0;
    for (Index q = 1; q < traces.size(); ++q) {
        const double w = flat_top_weight(static_cast<double>(q) / h0, flat_top_k);
        if (w == 0.0) break;
        num += 2.0 * static_cast<double>(q) * w * std::abs(traces(q));
        den += 2.0 * w * std::abs(traces(q));
    }
    const double h_ref = std::pow(t_count, 1.0 / 3.0);
    const double h = std::clamp(h_ref * (num / den), 1.0, 2.0 * h_ref);
    return {h, false};
}

} // namespace

BandwidthChoice select_bandwidth(const Grid& grid, const Matrix& series, double flat_top_k) {
    const Index t_count = series.cols();
    if (t_count < 8) throw std::invalid_argument("select_bandwidth: needs T >= 8");
    const Vector mean = series.rowwise().mean();
    const Matrix centered = series.colwise() - mean;
    const Index q_max = std::min<Index>(t_count - 2, static_cast<Index>(std::ceil(
                                                         std::pow(t_count, 0.2))) + 1);
    Vector traces(q_max + 1);
    for (Index q = 0; q <= q_max; ++q) traces(q) = lag_trace(grid, centered, q);
    return plugin_bandwidth(static_cast<double>(t_count), traces, flat_top_k);
}

BandwidthChoice select_bandwidth_pooled(const Grid& grid,
                                        const std::vector<const Matrix*>& series,
                                        double flat_top_k) {
    if (series.empty()) throw std::invalid_argument("select_bandwidth_pooled: no series");
    const Index t_count = series.front()->cols();
    if (t_count < 8) throw std::invalid_argument("select_bandwidth_pooled: needs T >= 8");
    const Index q_max = std::min<Index>(t_count - 2, static_cast<Index>(std::ceil(
                                                         std::pow(t_count, 0.2))) + 1);
    Vector traces = Vector::Zero(q_max + 1);
    for (const Matrix* s : series) {
        const Vector mean = s->rowwise().mean();
        const Matrix centered = s->colwise() - mean;
        for (Index q = 0; q <= q_max; ++q) traces(q) += lag_trace(grid, centered, q);
    }
    traces /= static_cast<double>(series.size());
    return plugin_bandwidth(static_cast<double>(t_count), traces, flat_top_k);
}

namespace {

void fix_signs(Matrix& columns) {
    for (Index c = 0; c < columns.cols(); ++c) {
        Index at = 0;
        columns.col(c).cwiseAbs().maxCoeff(&at);
        if (columns(at, c) < 0.0) columns.col(c) = -columns.col(c);
    }
}

} // namespace

EigenSystem eigen_decompose(const KernelMatrix& kernel) {
    if (!kernel.grid) throw std::invalid_argument("eigen_decompose: kernel has no grid");
    const Index j_count = kernel.grid->size();
    if (kernel.values.rows() != j_count || kernel.values.cols() != j_count)
        throw std::invalid_argument("eigen_decompose: kernel is not J x J");
    if (!kernel.values.allFinite())
        throw std::invalid_argument("eigen_decompose: non-finite kernel entries");

    const Vector sqrt_w = kernel.grid->quad_weights().cwiseSqrt();
    Matrix a = sqrt_w.asDiagonal() * kernel.values * sqrt_w.asDiagonal();
    a = (0.5 * (a + a.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigen_decompose: eigensolver failed");

    EigenSystem sys;
    sys.grid = kernel.grid;
    sys.eigenvalues = solver.eigenvalues().reverse();
    sys.eigenfunctions = sqrt_w.cwiseInverse().asDiagonal() *
                         solver.eigenvectors().rowwise().reverse();
    sys.eigenvalues = sys.eigenvalues.cwiseMax(0.0);
    fix_signs(sys.eigenfunctions);
    return sys;
}

namespace {

EigenSystem constant_fallback(const GridPtr& grid) {
    EigenSystem sys;
    sys.grid = grid;
    sys.eigenvalues = Vector::Zero(1);
    sys.eigenfunctions =
        Matrix::Constant(grid->size(), 1, 1.0 / std::sqrt(grid->b() - grid->a()));
    return sys;
}

} // namespace

EigenSystem eigen_from_outer(const GridPtr& grid, const Matrix& curves, double divisor) {
    if (!grid || curves.rows() != grid->size())
        throw std::invalid_argument("eigen_from_outer: curves off the grid");
    if (!(divisor > 0.0)) throw std::invalid_argument("eigen_from_outer: divisor must be > 0");
    const Vector sqrt_w = grid->quad_weights().cwiseSqrt();
    const Matrix z = (sqrt_w.asDiagonal() * curves) / std::sqrt(divisor);
    Matrix gram = z.transpose() * z;
    gram = (0.5 * (gram + gram.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    const Vector lambda = solver.eigenvalues().reverse();
    const Matrix vecs = solver.eigenvectors().rowwise().reverse();

    const double cutoff = std::max(lambda(0), 0.0) * 1e-12;
    Index keep = 0;
    while (keep < lambda.size() && lambda(keep) > cutoff && lambda(keep) > 0.0) ++keep;
    if (keep == 0) return constant_fallback(grid);

    EigenSystem sys;
    sys.grid = grid;
    sys.eigenvalues = lambda.head(keep);
    sys.eigenfunctions = sqrt_w.cwiseInverse().asDiagonal() *
                         (z * vecs.leftCols(keep) *
                          lambda.head(keep).cwiseSqrt().cwiseInverse().asDiagonal());
    for (Index c = 0; c < sys.eigenfunctions.cols(); ++c) {
        Index at = 0;
        sys.eigenfunctions.col(c).cwiseAbs().maxCoeff(&at);
        if (sys.eigenfunctions(at, c) < 0.0) sys.eigenfunctions.col(c) *= -1.0;
    }
    return sys;
}

EigenSystem eigen_from_factored(const GridPtr& grid, const Matrix& z, const Matrix& b_sym) {
    if (!grid || z.rows() != grid->size())
        throw std::invalid_argument("eigen_from_factored: curves off the grid");
    const Index j_count = z.rows();
    const Index t_count = z.cols();
    const Index rank_cap = std::min(j_count, t_count);
    const Vector sqrt_w = grid->quad_weights().cwiseSqrt();
    const Matrix y = sqrt_w.asDiagonal() * z;
    Eigen::HouseholderQR<Matrix> qr(y);
    const Matrix thin_q = qr.householderQ() * Matrix::Identity(j_count, rank_cap);
    const Matrix qy = thin_q.transpose() * y; // rank_cap x T
    Matrix small = qy * b_sym * qy.transpose();
    small = (0.5 * (small + small.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(small);

    EigenSystem sys;
    sys.grid = grid;
    sys.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
    sys.eigenfunctions = sqrt_w.cwiseInverse().asDiagonal() *
                         (thin_q * solver.eigenvectors().rowwise().reverse());
    for (Index c = 0; c < sys.eigenfunctions.cols(); ++c) {
        Index at = 0;
        sys.eigenfunctions.col(c).cwiseAbs().maxCoeff(&at);
        if (sys.eigenfunctions(at, c) < 0.0) sys.eigenfunctions.col(c) *= -1.0;
    }
    return sys;
}

ComponentChoice select_n_components(const Vector& eigenvalues, double share, Index n_sample) {
    if (eigenvalues.size() == 0)
        throw std::invalid_argument("select_n_components: empty spectrum");
    if (!(share > 0.0 && share <= 1.0))
        throw std::invalid_argument("select_n_components: share must be in (0,1]");
    if (n_sample < 2) throw std::invalid_argument("select_n_components: needs n >= 2");

    const Vector positive = eigenvalues.cwiseMax(0.0);
    const double total = positive.sum();
    if (total <= 0.0) return {1, true};

    Index n_positive = 0;
    for (Index m = 0; m < positive.size(); ++m)
        if (positive(m) > 0.0) n_positive = m + 1;

    Index by_share = 1;
    double cum = 0.0;
    for (Index m = 0; m < n_positive; ++m) {
        cum += positive(m);
        if (cum / total >= share - 1e-12) {
            by_share = m + 1;
            break;
        }
        by_share = m + 1;
    }

    const double bound = std::sqrt(static_cast<double>(n_sample)) /
                         std::log10(static_cast<double>(n_sample));
    Index by_ratio = 1;
    for (Index m = 0; m < n_positive; ++m) {
        if (positive(0) / positive(m) <= bound)
            by_ratio = m + 1;
        else
            break;
    }

    return {std::max(by_share, by_ratio), false};
}

Vector project_scores(const GridFunction& curve, const EigenSystem& basis, Index n) {
    if (!basis.grid || !curve.grid || !same_grid(*curve.grid, *basis.grid))
        throw std::invalid_argument("project_scores: grid mismatch");
    if (n > basis.count())
        throw std::invalid_argument("project_scores: more components than available");
    const Vector weighted = curve.grid->quad_weights().cwiseProduct(curve.values);
    return basis.eigenfunctions.leftCols(n).transpose() * weighted;
}

} // namespace mftsc
