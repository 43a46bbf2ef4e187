#pragma once

#include "mftsc/grid.hpp"

#include <vector>

namespace mftsc {

struct VARModel {
    int order = 1;
    Vector intercept;         // d
    std::vector<Matrix> coef; // order matrices, d x d; coef[j] applies to lag j+1
    Matrix residuals;         // (T_fit - order) x d
    Index dimension = 0;
    bool stable = true;     // companion spectral radius < 1
    bool ridge_used = false;
};

/// Least-squares VAR(p) with intercept; p chosen by AIC over 1..p_max on a
/// common sample, refit at the winner. Short samples shrink p_max; a
/// rank-deficient design falls back to a lightly ridged solve (flagged).
VARModel fit_var(const Matrix& scores, int p_max);

/// Iterated h-step forecasts. `last_obs` holds the final `order` rows of the
/// series, oldest first. Explosive models still forecast (stable flag warns).
Matrix forecast_scores(const VARModel& model, const Matrix& last_obs, Index horizon);

double companion_spectral_radius(const VARModel& model);

} // namespace mftsc
