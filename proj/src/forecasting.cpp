#include "mftsc/forecasting.hpp"

#include "mftsc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mftsc {

std::vector<GridFunction> forecast_curves(const PanelModelFit& fit, Index object,
                                          Index horizon, int p_max) {
    if (horizon < 1) throw std::invalid_argument("forecast_curves: horizon must be >= 1");
    if (object < 0 || object >= fit.n_objects())
        throw std::invalid_argument("forecast_curves: object index out of range");

    const VARModel var_xi = fit_var(fit.xi, p_max);
    const Matrix xi_fc =
        forecast_scores(var_xi, fit.xi.bottomRows(var_xi.order), horizon);
    const Matrix& zeta = fit.zeta[static_cast<std::size_t>(object)];
    const VARModel var_zeta = fit_var(zeta, p_max);
    const Matrix zeta_fc =
        forecast_scores(var_zeta, zeta.bottomRows(var_zeta.order), horizon);

    const Matrix rho = fit.r_basis.eigenfunctions.leftCols(fit.n1);
    const Matrix psi = fit.u_basis.eigenfunctions.leftCols(fit.n2);
    const Vector base =
        fit.decomposition.mu.values + fit.decomposition.eta.col(object);

    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (Index s = 0; s < horizon; ++s) {
        Vector values = base + rho * xi_fc.row(s).transpose() +
                        psi * zeta_fc.row(s).transpose();
        out.emplace_back(fit.grid, std::move(values));
    }
    return out;
}

double rmsfe(const std::vector<GridFunction>& actuals,
             const std::vector<GridFunction>& forecasts) {
    if (actuals.size() != forecasts.size() || actuals.empty())
        throw std::invalid_argument("rmsfe: shape mismatch");
    double sse = 0.0;
    Index count = 0;
    for (std::size_t w = 0; w < actuals.size(); ++w) {
        if (!actuals[w].grid || !forecasts[w].grid ||
            !same_grid(*actuals[w].grid, *forecasts[w].grid))
            throw std::invalid_argument("rmsfe: grid mismatch");
        sse += (actuals[w].values - forecasts[w].values).squaredNorm();
        count += actuals[w].values.size();
    }
    return std::sqrt(sse / static_cast<double>(count));
}

namespace {

double quantile_sorted(const Vector& sorted, double p) {
    const Index n = sorted.size();
    if (n == 1) return sorted(0);
    const double pos = p * static_cast<double>(n - 1);
    const Index lo = static_cast<Index>(std::floor(pos));
    const Index hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted(lo) * (1.0 - frac) + sorted(hi) * frac;
}

} // namespace

PredictionInterval bootstrap_prediction_interval(const Matrix& error_samples,
                                                 const GridFunction& point_forecast,
                                                 double alpha, int draws,
                                                 std::uint64_t seed) {
    const Index j_count = error_samples.rows();
    const Index m = error_samples.cols();
    if (!point_forecast.grid || j_count != point_forecast.grid->size())
        throw std::invalid_argument("bootstrap_prediction_interval: grid mismatch");
    if (m < 8)
        throw std::invalid_argument(
            "bootstrap_prediction_interval: needs >= 8 error samples per age");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("bootstrap_prediction_interval: alpha in (0,1)");
    if (draws < 2) throw std::invalid_argument("bootstrap_prediction_interval: draws >= 2");

    PredictionInterval out;
    out.alpha = alpha;

    Vector lb(j_count), ub(j_count);
    for (Index j = 0; j < j_count; ++j) {
        auto rng = make_rng(substream(seed, static_cast<std::uint64_t>(j)));
        std::uniform_int_distribution<Index> pick(0, m - 1);
        Vector resample(draws);
        for (int b = 0; b < draws; ++b) resample(b) = error_samples(j, pick(rng));
        std::sort(resample.data(), resample.data() + draws);
        lb(j) = quantile_sorted(resample, alpha / 2.0);
        ub(j) = quantile_sorted(resample, 1.0 - alpha / 2.0);
    }

    const double target = 1.0 - alpha;
    const auto coverage = [&](double theta) {
        Index covered = 0;
        for (Index j = 0; j < j_count; ++j)
            for (Index s = 0; s < m; ++s) {
                const double e = error_samples(j, s);
                if (e >= theta * lb(j) - 1e-15 && e <= theta * ub(j) + 1e-15) ++covered;
            }
        return static_cast<double>(covered) / static_cast<double>(j_count * m);
    };

    if (error_samples.cwiseAbs().maxCoeff() == 0.0) {
        out.degenerate = true;
        out.theta = 1e-3;
    } else {
        double hi = 1.0;
        while (coverage(hi) < target && hi < 1024.0) hi *= 2.0;
        // smallest theta on the 1e-3 grid by bisection over grid indices
        long lo_idx = 0;
        long hi_idx = static_cast<long>(std::ceil(hi / 1e-3));
        while (lo_idx < hi_idx) {
            const long mid = lo_idx + (hi_idx - lo_idx) / 2;
            if (coverage(static_cast<double>(mid) * 1e-3) >= target)
                hi_idx = mid;
            else
                lo_idx = mid + 1;
        }
        out.theta = static_cast<double>(hi_idx) * 1e-3;
        if (coverage(out.theta) < target) out.degenerate = true; // cap hit
    }

    out.lower = GridFunction(point_forecast.grid, point_forecast.values + out.theta * lb);
    out.upper = GridFunction(point_forecast.grid, point_forecast.values + out.theta * ub);
    return out;
}

double interval_score(const GridFunction& lower, const GridFunction& upper,
                      const GridFunction& actual, double alpha) {
    if (!lower.grid || !upper.grid || !actual.grid ||
        !same_grid(*lower.grid, *upper.grid) || !same_grid(*lower.grid, *actual.grid))
        throw std::invalid_argument("interval_score: grid mismatch");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("interval_score: alpha in (0,1)");
    const Index j_count = actual.values.size();
    double acc = 0.0;
    for (Index j = 0; j < j_count; ++j) {
        const double lb = lower.values(j);
        const double ub = upper.values(j);
        const double y = actual.values(j);
        if (lb > ub + 1e-12) throw std::invalid_argument("interval_score: crossed bounds");
        double s = ub - lb;
        if (y < lb) s += 2.0 / alpha * (lb - y);
        if (y > ub) s += 2.0 / alpha * (y - ub);
        acc += s;
    }
    return acc / static_cast<double>(j_count);
}

UnivariateFit fit_univariate(const GridPtr& grid, const Matrix& series, double share,
                             const LongRunConfig& lr_config) {
    if (!grid || series.rows() != grid->size())
        throw std::invalid_argument("fit_univariate: series off the grid");
    const Index t_count = series.cols();
    if (t_count < 4) throw std::invalid_argument("fit_univariate: needs T >= 4");
    UnivariateFit fit;
    fit.grid = grid;
    fit.mean = series.rowwise().mean();
    const Matrix centered = series.colwise() - fit.mean;
    const EigenSystem sys = eigen_decompose(long_run_covariance(grid, centered, lr_config));
    const Index n = std::min(select_n_components(sys.eigenvalues, share, t_count).count,
                             sys.count());
    fit.basis = sys.eigenfunctions.leftCols(n);
    fit.scores =
        (fit.basis.transpose() * grid->quad_weights().asDiagonal() * centered).transpose();
    return fit;
}

std::vector<GridFunction> forecast_univariate(const UnivariateFit& fit, Index horizon,
                                              int p_max) {
    if (horizon < 1) throw std::invalid_argument("forecast_univariate: horizon >= 1");
    const VARModel var = fit_var(fit.scores, p_max);
    const Matrix fc = forecast_scores(var, fit.scores.bottomRows(var.order), horizon);
    std::vector<GridFunction> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (Index s = 0; s < horizon; ++s)
        out.emplace_back(fit.grid, (fit.mean + fit.basis * fc.row(s).transpose()).eval());
    return out;
}

namespace {

FTSPanel truncate_panel(const FTSPanel& panel, Index t_keep) {
    FTSPanel out;
    out.grid = panel.grid;
    out.labels = panel.labels;
    out.series.reserve(panel.series.size());
    for (const auto& s : panel.series) out.series.push_back(s.leftCols(t_keep));
    return out;
}

// per-origin forecasts for every object, horizons 1..h(origin)
using OriginForecasts = std::vector<Matrix>; // [object] J x h

OriginForecasts forecast_origin_uts(const FTSPanel& panel, Index kappa, Index h_cap,
                                    const EvaluationOptions& options) {
    const Index h = std::min<Index>(h_cap, panel.n_times() - kappa);
    OriginForecasts out(static_cast<std::size_t>(panel.n_objects()));
    for (Index i = 0; i < panel.n_objects(); ++i) {
        const UnivariateFit fit =
            fit_univariate(panel.grid, panel.series[static_cast<std::size_t>(i)].leftCols(kappa),
                           options.cluster.p2, options.cluster.lr);
        const auto curves = forecast_univariate(fit, h, options.p_max);
        Matrix fc(panel.grid->size(), h);
        for (Index s = 0; s < h; ++s) fc.col(s) = curves[static_cast<std::size_t>(s)].values;
        out[static_cast<std::size_t>(i)] = std::move(fc);
    }
    return out;
}

OriginForecasts forecast_origin_clustered(const FTSPanel& panel, Index kappa, Index h_cap,
                                          const std::vector<int>& labels, int k,
                                          const EvaluationOptions& options) {
    const Index h = std::min<Index>(h_cap, panel.n_times() - kappa);
    OriginForecasts out(static_cast<std::size_t>(panel.n_objects()));
    for (int c = 1; c <= k; ++c) {
        std::vector<Index> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) members.push_back(static_cast<Index>(i));
        if (members.empty()) continue;
        if (members.size() == 1) {
            // singleton cluster: the panel model needs >= 2 objects, fall
            // back to the univariate forecaster
            const Index i = members[0];
            const UnivariateFit fit = fit_univariate(
                panel.grid, panel.series[static_cast<std::size_t>(i)].leftCols(kappa),
                options.cluster.p2, options.cluster.lr);
            const auto curves = forecast_univariate(fit, h, options.p_max);
            Matrix fc(panel.grid->size(), h);
            for (Index s = 0; s < h; ++s)
                fc.col(s) = curves[static_cast<std::size_t>(s)].values;
            out[static_cast<std::size_t>(i)] = std::move(fc);
            continue;
        }
        FTSPanel sub;
        sub.grid = panel.grid;
        for (const Index i : members) {
            sub.labels.push_back(panel.labels[static_cast<std::size_t>(i)]);
            sub.series.push_back(panel.series[static_cast<std::size_t>(i)].leftCols(kappa));
        }
        const PanelModelFit fit = fit_panel_model(sub, options.cluster.p1, options.cluster.p2,
                                                  options.cluster.p3, options.cluster.lr);
        const VARModel var_xi = fit_var(fit.xi, options.p_max);
        const Matrix xi_fc = forecast_scores(var_xi, fit.xi.bottomRows(var_xi.order), h);
        const Matrix rho = fit.r_basis.eigenfunctions.leftCols(fit.n1);
        const Matrix psi = fit.u_basis.eigenfunctions.leftCols(fit.n2);
        for (std::size_t mi = 0; mi < members.size(); ++mi) {
            const Matrix& zeta = fit.zeta[mi];
            const VARModel var_zeta = fit_var(zeta, options.p_max);
            const Matrix zeta_fc =
                forecast_scores(var_zeta, zeta.bottomRows(var_zeta.order), h);
            const Vector base = fit.decomposition.mu.values +
                                fit.decomposition.eta.col(static_cast<Index>(mi));
            Matrix fc(panel.grid->size(), h);
            for (Index s = 0; s < h; ++s)
                fc.col(s) = base + rho * xi_fc.row(s).transpose() +
                            psi * zeta_fc.row(s).transpose();
            out[static_cast<std::size_t>(members[mi])] = std::move(fc);
        }
    }
    return out;
}

} // namespace

ForecastReport expanding_window_evaluation(const FTSPanel& panel, Index n_train,
                                           ForecastMethod method,
                                           const EvaluationOptions& options) {
    panel.validate();
    const Index n_total = panel.n_times();
    const Index i_count = panel.n_objects();
    const Index j_count = panel.grid->size();
    if (n_train < 4 || n_total - n_train < 1)
        throw std::invalid_argument("expanding_window_evaluation: insufficient data");
    const Index h_max = n_total - n_train;

    // clustering decided once, on the initial training window
    std::vector<int> labels(static_cast<std::size_t>(i_count), 1);
    int k = 1;
    if (method == ForecastMethod::MFTSC) {
        const ClusterAssignment assignment =
            cluster_mftsc(truncate_panel(panel, n_train), options.cluster);
        labels = assignment.labels;
        k = assignment.K;
    }

    const Index err_origin =
        options.with_intervals
            ? (options.error_origin > 0 ? options.error_origin
                                        : std::max<Index>(4, n_train / 2))
            : n_train;
    if (err_origin < 4 || err_origin > n_train)
        throw std::invalid_argument("expanding_window_evaluation: bad error origin");

    // forecasts and errors for every origin (shared by RMSFE and intervals)
    std::vector<OriginForecasts> forecasts(static_cast<std::size_t>(n_total));
    for (Index kappa = err_origin; kappa < n_total; ++kappa)
        forecasts[static_cast<std::size_t>(kappa)] =
            method == ForecastMethod::UTS
                ? forecast_origin_uts(panel, kappa, h_max, options)
                : forecast_origin_clustered(panel, kappa, h_max, labels, k, options);

    ForecastReport report;
    report.method = method == ForecastMethod::UTS ? "UTS" : "MFTSC";
    report.alpha = options.alpha;
    report.bootstrap_draws = options.with_intervals ? options.bootstrap_draws : 0;
    report.train_length = static_cast<int>(n_train);

    Matrix sse = Matrix::Zero(i_count, h_max);
    Vector window_count = Vector::Zero(h_max);
    Vector score_sum = Vector::Zero(h_max);
    Vector score_count = Vector::Zero(h_max);

    for (Index h = 1; h <= h_max; ++h) {
        for (Index kappa = n_train; kappa + h <= n_total; ++kappa) {
            window_count(h - 1) += 1.0;
            for (Index i = 0; i < i_count; ++i) {
                const Vector& fc =
                    forecasts[static_cast<std::size_t>(kappa)][static_cast<std::size_t>(i)]
                        .col(h - 1);
                const Vector actual =
                    panel.series[static_cast<std::size_t>(i)].col(kappa + h - 1);
                sse(i, h - 1) += (actual - fc).squaredNorm();

                if (options.with_intervals) {
                    // in-sample h-step errors from origins whose target lands
                    // inside the data seen by time kappa; pool shorter
                    // horizons when fewer than 8 samples exist
                    std::vector<Vector> errs;
                    const auto collect = [&](Index hh) {
                        for (Index ko = err_origin; ko + hh <= kappa; ++ko) {
                            const Matrix& f = forecasts[static_cast<std::size_t>(ko)]
                                                       [static_cast<std::size_t>(i)];
                            errs.push_back(
                                panel.series[static_cast<std::size_t>(i)].col(ko + hh - 1) -
                                f.col(hh - 1));
                        }
                    };
                    collect(h);
                    for (Index hh = h - 1; hh >= 1 && static_cast<Index>(errs.size()) < 8;
                         --hh)
                        collect(hh);
                    if (static_cast<Index>(errs.size()) < 8) continue;
                    Matrix err_mat(j_count, static_cast<Index>(errs.size()));
                    for (std::size_t e = 0; e < errs.size(); ++e)
                        err_mat.col(static_cast<Index>(e)) = errs[e];
                    const GridFunction point(panel.grid, fc);
                    const PredictionInterval pi = bootstrap_prediction_interval(
                        err_mat, point, options.alpha, options.bootstrap_draws,
                        substream(options.seed, static_cast<std::uint64_t>(kappa),
                                  static_cast<std::uint64_t>(h),
                                  static_cast<std::uint64_t>(i)));
                    const GridFunction actual_fn(panel.grid, actual);
                    score_sum(h - 1) +=
                        interval_score(pi.lower, pi.upper, actual_fn, options.alpha);
                    score_count(h - 1) += 1.0;
                }
            }
        }
    }

    for (Index h = 1; h <= h_max; ++h) {
        report.horizons.push_back(static_cast<int>(h));
        double mean_rmsfe = 0.0;
        for (Index i = 0; i < i_count; ++i)
            mean_rmsfe += std::sqrt(sse(i, h - 1) / (static_cast<double>(j_count) *
                                                     window_count(h - 1)));
        report.rmsfe.push_back(mean_rmsfe / static_cast<double>(i_count));
        report.mean_interval_score.push_back(
            score_count(h - 1) > 0.0 ? score_sum(h - 1) / score_count(h - 1)
                                     : std::numeric_limits<double>::quiet_NaN());
    }
    return report;
}

} // namespace mftsc
