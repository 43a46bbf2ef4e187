#include "mftsc/var.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mftsc {

namespace {

struct LsFit {
    Matrix b; // (1 + d*p) x d
    Matrix residuals;
    bool ridge_used = false;
};

Matrix design_matrix(const Matrix& scores, int p, Index t_start) {
    const Index d = scores.cols();
    const Index t_count = scores.rows();
    const Index rows = t_count - t_start;
    Matrix x(rows, 1 + d * p);
    for (Index r = 0; r < rows; ++r) {
        const Index t = t_start + r;
        x(r, 0) = 1.0;
        for (int j = 1; j <= p; ++j)
            x.row(r).segment(1 + d * (j - 1), d) = scores.row(t - j);
    }
    return x;
}

LsFit least_squares(const Matrix& scores, int p, Index t_start) {
    const Index d = scores.cols();
    const Matrix x = design_matrix(scores, p, t_start);
    const Matrix y = scores.bottomRows(scores.rows() - t_start);
    LsFit fit;
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < x.cols()) {
        const Matrix gram = x.transpose() * x;
        const double ridge = 1e-8 * gram.trace() / static_cast<double>(x.cols());
        fit.b = (gram + ridge * Matrix::Identity(x.cols(), x.cols()))
                    .ldlt()
                    .solve(x.transpose() * y);
        fit.ridge_used = true;
    } else {
        fit.b = qr.solve(y);
    }
    fit.residuals = y - x * fit.b;
    (void)d;
    return fit;
}

double aic_of(const Matrix& residuals, int p, Index d) {
    const double n_obs = static_cast<double>(residuals.rows());
    Matrix sigma = residuals.transpose() * residuals / n_obs;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    double log_det = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        log_det += std::log(std::max(es.eigenvalues()(i), 1e-300));
    const double n_params = static_cast<double>(p) * static_cast<double>(d * d) +
                            static_cast<double>(d);
    return log_det + 2.0 * n_params / n_obs;
}

} // namespace

VARModel fit_var(const Matrix& scores, int p_max) {
    const Index t_count = scores.rows();
    const Index d = scores.cols();
    if (d < 1) throw std::invalid_argument("fit_var: empty score matrix");
    if (p_max < 1) throw std::invalid_argument("fit_var: p_max must be >= 1");
    if (t_count < d + 3) {
        if (t_count < 3) throw std::invalid_argument("fit_var: series too short");
    }
    // shrink the candidate order until the design has spare rows
    int p_feas = p_max;
    while (p_feas > 1 &&
           t_count - p_feas < static_cast<Index>(d) * p_feas + 2)
        --p_feas;

    int best_p = 1;
    if (p_feas > 1) {
        double best_aic = std::numeric_limits<double>::infinity();
        for (int p = 1; p <= p_feas; ++p) {
            const LsFit fit = least_squares(scores, p, p_feas); // common sample
            const double aic = aic_of(fit.residuals, p, d);
            if (aic < best_aic) {
                best_aic = aic;
                best_p = p;
            }
        }
    }

    const LsFit fit = least_squares(scores, best_p, best_p);
    VARModel model;
    model.order = best_p;
    model.dimension = d;
    model.intercept = fit.b.row(0).transpose();
    model.coef.reserve(static_cast<std::size_t>(best_p));
    for (int j = 0; j < best_p; ++j)
        model.coef.push_back(fit.b.middleRows(1 + d * j, d).transpose());
    model.residuals = fit.residuals;
    model.ridge_used = fit.ridge_used;
    model.stable = companion_spectral_radius(model) < 1.0;
    return model;
}

double companion_spectral_radius(const VARModel& model) {
    const Index d = model.dimension;
    const Index p = model.order;
    Matrix companion = Matrix::Zero(d * p, d * p);
    for (Index j = 0; j < p; ++j)
        companion.block(0, j * d, d, d) = model.coef[static_cast<std::size_t>(j)];
    if (p > 1)
        companion.block(d, 0, d * (p - 1), d * (p - 1)) =
            Matrix::Identity(d * (p - 1), d * (p - 1));
    Eigen::EigenSolver<Matrix> es(companion, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix forecast_scores(const VARModel& model, const Matrix& last_obs, Index horizon) {
    if (horizon < 1) throw std::invalid_argument("forecast_scores: horizon must be >= 1");
    if (last_obs.rows() < model.order || last_obs.cols() != model.dimension)
        throw std::invalid_argument("forecast_scores: last_obs must be order x dimension");
    const Index d = model.dimension;
    const int p = model.order;
    std::vector<Vector> history;
    history.reserve(static_cast<std::size_t>(p) + static_cast<std::size_t>(horizon));
    for (Index r = last_obs.rows() - p; r < last_obs.rows(); ++r)
        history.push_back(last_obs.row(r).transpose());

    Matrix out(horizon, d);
    for (Index s = 0; s < horizon; ++s) {
        Vector next = model.intercept;
        for (int j = 1; j <= p; ++j)
            next += model.coef[static_cast<std::size_t>(j - 1)] *
                    history[history.size() - static_cast<std::size_t>(j)];
        out.row(s) = next.transpose();
        history.push_back(std::move(next));
    }
    return out;
}

} // namespace mftsc
