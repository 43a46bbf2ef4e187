#pragma once

#include "mftsc/clustering.hpp"
#include "mftsc/grid.hpp"
#include "mftsc/panel_model.hpp"
#include "mftsc/var.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mftsc {

struct PredictionInterval {
    GridFunction lower;
    GridFunction upper;
    double theta = 1.0;
    double alpha = 0.2;
    bool degenerate = false;
};

struct ForecastReport {
    std::string method;
    std::vector<int> horizons;
    std::vector<double> rmsfe;               // averaged across objects
    std::vector<double> mean_interval_score; // NaN when intervals disabled
    double alpha = 0.2;
    int bootstrap_draws = 0;
    int train_length = 0;
};

/// h-step curve forecasts for one object from a fit trained on its first
/// kappa time points: VAR forecasts of xi (cluster level) and of the
/// object's zeta, recombined with mu + eta_i (eta kept un-truncated).
std::vector<GridFunction> forecast_curves(const PanelModelFit& fit, Index object,
                                          Index horizon, int p_max = 5);

/// sqrt of the mean squared error over all (curve, age) pairs at one horizon.
double rmsfe(const std::vector<GridFunction>& actuals,
             const std::vector<GridFunction>& forecasts);

/// Pointwise bootstrap interval: per-age (alpha/2, 1-alpha/2) empirical
/// quantiles of `draws` resampled errors, widened by the smallest theta on a
/// 1e-3 grid whose in-sample coverage reaches 1-alpha.
PredictionInterval bootstrap_prediction_interval(const Matrix& error_samples,
                                                 const GridFunction& point_forecast,
                                                 double alpha, int draws,
                                                 std::uint64_t seed);

/// Width plus 2/alpha-scaled exceedances, averaged over ages.
double interval_score(const GridFunction& lower, const GridFunction& upper,
                      const GridFunction& actual, double alpha);

/// Per-object dynamic-FPCA forecaster (the univariate baseline): own mean,
/// long-run covariance basis, VAR on the scores.
struct UnivariateFit {
    GridPtr grid;
    Vector mean;
    Matrix basis;  // J x N
    Matrix scores; // T x N
};
UnivariateFit fit_univariate(const GridPtr& grid, const Matrix& series, double share,
                             const LongRunConfig& lr_config);
std::vector<GridFunction> forecast_univariate(const UnivariateFit& fit, Index horizon,
                                              int p_max = 5);

enum class ForecastMethod { UTS, MFTSC };

struct EvaluationOptions {
    MftscConfig cluster;       // clustering run once on the initial window
    int p_max = 5;
    bool with_intervals = false;
    double alpha = 0.2;
    int bootstrap_draws = 1000;
    std::uint64_t seed = 0;
    Index error_origin = 0;    // first origin for in-sample errors; 0 = n/2
};

/// Expanding-window point (and optional interval) forecast evaluation:
/// refits at every origin kappa = n..N-1 and aggregates per-horizon RMSFE
/// over the (N-n-h+1) windows, averaged across objects.
ForecastReport expanding_window_evaluation(const FTSPanel& panel, Index n_train,
                                           ForecastMethod method,
                                           const EvaluationOptions& options);

} // namespace mftsc
