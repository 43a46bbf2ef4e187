#include "mftsc/panel_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mftsc {

PanelDecomposition decompose_panel(const FTSPanel& panel) {
    panel.validate();
    const Index i_count = panel.n_objects();
    const Index t_count = panel.n_times();
    if (i_count < 2 || t_count < 2)
        throw std::invalid_argument("decompose_panel: needs I >= 2 and T >= 2");
    const Index j_count = panel.grid->size();

    Matrix object_mean(j_count, i_count); // ybar_i.
    Matrix time_mean = Matrix::Zero(j_count, t_count); // ybar_.t
    for (Index i = 0; i < i_count; ++i) {
        object_mean.col(i) = panel.series[static_cast<std::size_t>(i)].rowwise().mean();
        time_mean += panel.series[static_cast<std::size_t>(i)];
    }
    time_mean /= static_cast<double>(i_count);
    const Vector grand = object_mean.rowwise().mean();

    PanelDecomposition dec;
    dec.mu = GridFunction(panel.grid, grand);
    dec.eta = object_mean.colwise() - grand;
    dec.r = time_mean.colwise() - grand;
    dec.u.reserve(static_cast<std::size_t>(i_count));
    for (Index i = 0; i < i_count; ++i) {
        Matrix u = panel.series[static_cast<std::size_t>(i)];
        u.colwise() -= object_mean.col(i);
        u -= dec.r;
        dec.u.push_back(std::move(u));
    }
    return dec;
}

Matrix cross_basis_matrix(const Grid& grid, const Matrix& rho, const Matrix& psi) {
    return rho.transpose() * grid.quad_weights().asDiagonal() * psi;
}

Matrix stacked_cross_gram(const Matrix& q) {
    const Index n1 = q.rows();
    const Index n2 = q.cols();
    Matrix g = Matrix::Identity(n1 + n2, n1 + n2);
    g.topRightCorner(n1, n2) = q;
    g.bottomLeftCorner(n2, n1) = q.transpose();
    return g;
}

std::pair<Vector, Vector> joint_score_projection(const GridFunction& demeaned,
                                                 const EigenSystem& r_basis, Index n1,
                                                 const EigenSystem& u_basis, Index n2,
                                                 const Matrix& q) {
    if (!demeaned.grid || !r_basis.grid || !same_grid(*demeaned.grid, *r_basis.grid) ||
        !u_basis.grid || !same_grid(*demeaned.grid, *u_basis.grid))
        throw std::invalid_argument("joint_score_projection: grid mismatch");
    if (n1 < 1 || n2 < 1 || n1 > r_basis.count() || n2 > u_basis.count())
        throw std::invalid_argument("joint_score_projection: bad component counts");
    if (q.rows() != n1 || q.cols() != n2)
        throw std::invalid_argument("joint_score_projection: cross matrix shape mismatch");

    const Vector weighted = demeaned.grid->quad_weights().cwiseProduct(demeaned.values);
    Vector stacked(n1 + n2);
    stacked.head(n1) = r_basis.eigenfunctions.leftCols(n1).transpose() * weighted;
    stacked.tail(n2) = u_basis.eigenfunctions.leftCols(n2).transpose() * weighted;

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked_cross_gram(q));
    const Vector beta = cod.solve(stacked);
    return {beta.head(n1), beta.tail(n2)};
}

PanelModelFit fit_panel_model(const FTSPanel& panel, double p1, double p2, double p3,
                              const LongRunConfig& lr_config, const FitOptions& options) {
    panel.validate();
    const Index i_count = panel.n_objects();
    const Index t_count = panel.n_times();
    if (i_count < 2 || t_count < 4)
        throw std::invalid_argument("fit_panel_model: needs I >= 2 and T >= 4");

    PanelModelFit fit;
    fit.grid = panel.grid;
    fit.labels = panel.labels;
    fit.decomposition = decompose_panel(panel);
    const PanelDecomposition& dec = fit.decomposition;

    // level covariances: static for eta, long-run for r and pooled u
    KernelMatrix c_eta{panel.grid,
                       dec.eta * dec.eta.transpose() / static_cast<double>(i_count - 1)};
    fit.eta_basis = eigen_decompose(c_eta);

    LongRunConfig lr_r = lr_config;
    if (!lr_r.bandwidth)
        lr_r.bandwidth = t_count >= 8
                             ? select_bandwidth(*panel.grid, dec.r, lr_config.flat_top_k).h
                             : 1.0;
    fit.r_basis = eigen_decompose(long_run_covariance(panel.grid, dec.r, lr_r));

    LongRunConfig lr_u = lr_config;
    if (!lr_u.bandwidth) {
        std::vector<const Matrix*> views;
        views.reserve(dec.u.size());
        for (const auto& u : dec.u) views.push_back(&u);
        lr_u.bandwidth =
            t_count >= 8 ? select_bandwidth_pooled(*panel.grid, views, lr_config.flat_top_k).h
                         : 1.0;
    }
    KernelMatrix c_u{panel.grid, Matrix::Zero(panel.grid->size(), panel.grid->size())};
    for (const auto& u : dec.u)
        c_u.values += long_run_covariance(panel.grid, u, lr_u).values;
    c_u.values /= static_cast<double>(i_count);
    fit.u_basis = eigen_decompose(c_u);

    fit.m = options.force_m.value_or(select_n_components(fit.eta_basis.eigenvalues, p1,
                                                         i_count).count);
    fit.n1 = options.force_n1.value_or(select_n_components(fit.r_basis.eigenvalues, p2,
                                                           t_count).count);
    fit.n2 = options.force_n2.value_or(select_n_components(fit.u_basis.eigenvalues, p3,
                                                           i_count * t_count).count);
    fit.m = std::min(fit.m, fit.eta_basis.count());
    fit.n1 = std::min(fit.n1, fit.r_basis.count());
    fit.n2 = std::min(fit.n2, fit.u_basis.count());

    const Vector& w = panel.grid->quad_weights();
    fit.gamma = dec.eta.transpose() * w.asDiagonal() * fit.eta_basis.eigenfunctions.leftCols(fit.m);

    const Matrix rho = fit.r_basis.eigenfunctions.leftCols(fit.n1);
    const Matrix psi = fit.u_basis.eigenfunctions.leftCols(fit.n2);
    fit.q = cross_basis_matrix(*panel.grid, rho, psi);

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked_cross_gram(fit.q));
    Matrix projector(fit.n1 + fit.n2, panel.grid->size()); // [rho psi]^T W
    projector.topRows(fit.n1) = rho.transpose() * w.asDiagonal();
    projector.bottomRows(fit.n2) = psi.transpose() * w.asDiagonal();

    fit.xi = Matrix::Zero(t_count, fit.n1);
    fit.zeta.reserve(static_cast<std::size_t>(i_count));
    for (Index i = 0; i < i_count; ++i) {
        const Matrix& y = panel.series[static_cast<std::size_t>(i)];
        const Vector own_mean = y.rowwise().mean();
        const Matrix demeaned = y.colwise() - own_mean;
        const Matrix beta = cod.solve((projector * demeaned).eval()); // (N1+N2) x T
        fit.xi += beta.topRows(fit.n1).transpose();
        fit.zeta.push_back(beta.bottomRows(fit.n2).transpose());
    }
    fit.xi /= static_cast<double>(i_count);

    fit.config.share_eta = p1;
    fit.config.share_r = p2;
    fit.config.share_u = p3;
    fit.config.flat_top_k = lr_config.flat_top_k;
    fit.config.max_lag = lr_config.max_lag;
    fit.config.bandwidth_r = *lr_r.bandwidth;
    fit.config.bandwidth_u = *lr_u.bandwidth;
    return fit;
}

GridFunction reconstruct_curve(const PanelModelFit& fit, Index i, Index t) {
    if (i < 0 || i >= fit.n_objects() || t < 0 || t >= fit.n_times())
        throw std::invalid_argument("reconstruct_curve: index out of range");
    Vector values = fit.decomposition.mu.values;
    values += fit.eta_basis.eigenfunctions.leftCols(fit.m) * fit.gamma.row(i).transpose();
    values += fit.r_basis.eigenfunctions.leftCols(fit.n1) * fit.xi.row(t).transpose();
    values += fit.u_basis.eigenfunctions.leftCols(fit.n2) *
              fit.zeta[static_cast<std::size_t>(i)].row(t).transpose();
    return GridFunction(fit.grid, std::move(values));
}

} // namespace mftsc
