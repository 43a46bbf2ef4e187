#pragma once

#include "mftsc/grid.hpp"

#include <optional>

namespace mftsc {

/// Observed central mortality rates m and exposures pop on an age grid,
/// one row per year.
struct RawMortalitySurface {
    Matrix rates;     // T x J, deaths / exposure (per person-year)
    Matrix exposures; // T x J, person-years
    GridPtr ages;

    void validate() const;
};

struct SmoothingConfig {
    /// Roughness penalty; unset selects by weighted-L1 cross-validation
    /// over a log-spaced grid {1e-3 .. 1e2}.
    std::optional<double> tau0;
    /// Ages at or above this must be nondecreasing; unset disables.
    std::optional<double> monotone_from = 65.0;
};

/// w_j = m_j * pop_j, the reciprocal of the approximate log-rate variance.
/// Rejects nonpositive rates or exposures, naming the offending age.
Vector inverse_variance_weights(const Vector& rates, const Vector& exposures, const Grid& ages);

/// Minimizes  sum_j w_j |f_j - a_j| + tau0 * sum_j |a'_{j+1} - a'_j|  with a
/// nondecreasing over ages >= monotone_from, as an exact linear program.
/// The derivative a' is the forward difference divided by the grid spacing.
GridFunction smooth_curve(const GridPtr& ages, const Vector& log_rates, const Vector& weights,
                          const SmoothingConfig& config);

/// Weighted-L1 k-fold cross-validation over a log-spaced tau0 grid.
double select_tau0(const GridPtr& ages, const Vector& log_rates, const Vector& weights,
                   const SmoothingConfig& config, int folds = 5);

/// Evaluates the smoothing objective at a candidate a (used by tests and to
/// report the achieved objective).
double smoothing_objective(const Grid& ages, const Vector& log_rates, const Vector& weights,
                           double tau0, const Vector& a);

/// Smooths every year of a raw surface: log rates, inverse-variance weights,
/// penalized fit. Returns J x T (column t = smoothed log-rate curve).
Matrix smooth_surface(const RawMortalitySurface& surface, const SmoothingConfig& config);

} // namespace mftsc
