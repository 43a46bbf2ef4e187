#include "mftsc/smoothing.hpp"

#include "mftsc/parallel.hpp"
#include "mftsc/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mftsc {

void RawMortalitySurface::validate() const {
    if (!ages) throw std::invalid_argument("mortality surface has no age grid");
    if (rates.rows() != exposures.rows() || rates.cols() != exposures.cols())
        throw std::invalid_argument("mortality surface: rate/exposure shape mismatch");
    if (rates.cols() != ages->size())
        throw std::invalid_argument("mortality surface: column count differs from age grid");
    for (Index t = 0; t < rates.rows(); ++t)
        for (Index j = 0; j < rates.cols(); ++j) {
            if (exposures(t, j) < 0.0)
                throw std::invalid_argument("mortality surface: negative exposure");
            if (exposures(t, j) > 0.0 && !(rates(t, j) > 0.0))
                throw std::invalid_argument("mortality surface: nonpositive rate with exposure");
        }
}

Vector inverse_variance_weights(const Vector& rates, const Vector& exposures, const Grid& ages) {
    if (rates.size() != exposures.size() || rates.size() != ages.size())
        throw std::invalid_argument("inverse_variance_weights: length mismatch");
    Vector w(rates.size());
    for (Index j = 0; j < rates.size(); ++j) {
        if (!(rates(j) > 0.0))
            throw std::invalid_argument("nonpositive mortality rate at age " +
                                        std::to_string(ages.points()(j)));
        if (!(exposures(j) > 0.0))
            throw std::invalid_argument("nonpositive exposure at age " +
                                        std::to_string(ages.points()(j)));
        w(j) = rates(j) * exposures(j);
    }
    return w;
}

double smoothing_objective(const Grid& ages, const Vector& log_rates, const Vector& weights,
                           double tau0, const Vector& a) {
    const Index j_count = ages.size();
    double obj = weights.cwiseProduct((log_rates - a).cwiseAbs()).sum();
    const double dx = ages.spacing();
    for (Index j = 0; j + 2 < j_count; ++j)
        obj += tau0 * std::abs((a(j + 2) - 2.0 * a(j + 1) + a(j)) / dx);
    return obj;
}

namespace {

// LP variables: x = [p(J); n(J); r(J-2)], all >= 0, with a = f + p - n.
// Data term is exact because min(p_j, n_j) = 0 at any optimum with w_j > 0.
GridFunction solve_smoothing_lp(const GridPtr& ages, const Vector& f, const Vector& w,
                                double tau0, std::optional<double> monotone_from) {
    const Index j_count = ages->size();
    const double dx = ages->spacing();
    const Index n_pairs = j_count - 2;

    std::vector<Index> mono_rows;
    if (monotone_from)
        for (Index j = 0; j + 1 < j_count; ++j)
            if (ages->points()(j) >= *monotone_from - 1e-12) mono_rows.push_back(j);

    const Index n_vars = 2 * j_count + n_pairs;
    const Index n_rows = 2 * n_pairs + static_cast<Index>(mono_rows.size());
    Matrix A = Matrix::Zero(n_rows, n_vars);
    Vector b = Vector::Zero(n_rows);
    Vector c(n_vars);
    c.head(j_count) = w;
    c.segment(j_count, j_count) = w;
    c.tail(n_pairs).setConstant(tau0);

    const auto p_col = [](Index j) { return j; };
    const auto n_col = [j_count](Index j) { return j_count + j; };
    const auto r_col = [j_count](Index m) { return 2 * j_count + m; };

    // r_m >= +/- (f'' + D2(p - n)) / dx, with D2 the second difference
    for (Index m = 0; m < n_pairs; ++m) {
        const double fpp = (f(m + 2) - 2.0 * f(m + 1) + f(m)) / dx;
        const double coef[3] = {1.0 / dx, -2.0 / dx, 1.0 / dx};
        // r_m - d_m >= fpp
        Index row = 2 * m;
        A(row, r_col(m)) = 1.0;
        for (int s = 0; s < 3; ++s) {
            A(row, p_col(m + s)) -= coef[s];
            A(row, n_col(m + s)) += coef[s];
        }
        b(row) = fpp;
        // r_m + d_m >= -fpp
        row = 2 * m + 1;
        A(row, r_col(m)) = 1.0;
        for (int s = 0; s < 3; ++s) {
            A(row, p_col(m + s)) += coef[s];
            A(row, n_col(m + s)) -= coef[s];
        }
        b(row) = -fpp;
    }
    // (p - n)_{j+1} - (p - n)_j >= f_j - f_{j+1}
    for (std::size_t k = 0; k < mono_rows.size(); ++k) {
        const Index j = mono_rows[k];
        const Index row = 2 * n_pairs + static_cast<Index>(k);
        A(row, p_col(j + 1)) = 1.0;
        A(row, n_col(j + 1)) = -1.0;
        A(row, p_col(j)) = -1.0;
        A(row, n_col(j)) = 1.0;
        b(row) = f(j) - f(j + 1);
    }

    const SimplexResult sol = solve_lp_ge(A, b, c);
    Vector a = f + sol.x.head(j_count) - sol.x.segment(j_count, j_count);
    return GridFunction(ages, std::move(a));
}

} // namespace

GridFunction smooth_curve(const GridPtr& ages, const Vector& log_rates, const Vector& weights,
                          const SmoothingConfig& config) {
    if (!ages) throw std::invalid_argument("smooth_curve: null grid");
    if (log_rates.size() != ages->size() || weights.size() != ages->size())
        throw std::invalid_argument("smooth_curve: length mismatch");
    if (!log_rates.allFinite()) throw std::invalid_argument("smooth_curve: non-finite input");
    if ((weights.array() < 0.0).any())
        throw std::invalid_argument("smooth_curve: negative weights");
    const double tau0 =
        config.tau0 ? *config.tau0 : select_tau0(ages, log_rates, weights, config);
    if (tau0 < 0.0) throw std::invalid_argument("smooth_curve: tau0 must be nonnegative");
    return solve_smoothing_lp(ages, log_rates, weights, tau0, config.monotone_from);
}

double select_tau0(const GridPtr& ages, const Vector& log_rates, const Vector& weights,
                   const SmoothingConfig& config, int folds) {
    const Index j_count = ages->size();
    if (folds < 2) throw std::invalid_argument("select_tau0: needs >= 2 folds");
    static const double grid_tau[] = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    double best_tau = grid_tau[0];
    double best_err = std::numeric_limits<double>::infinity();
    for (const double tau : grid_tau) {
        double err = 0.0;
        for (int fold = 0; fold < folds; ++fold) {
            Vector w = weights;
            for (Index j = fold; j < j_count; j += folds) w(j) = 0.0;
            const GridFunction fit =
                solve_smoothing_lp(ages, log_rates, w, tau, config.monotone_from);
            for (Index j = fold; j < j_count; j += folds)
                err += weights(j) * std::abs(log_rates(j) - fit.values(j));
        }
        if (err < best_err - 1e-12) {
            best_err = err;
            best_tau = tau;
        }
    }
    return best_tau;
}

Matrix smooth_surface(const RawMortalitySurface& surface, const SmoothingConfig& config) {
    surface.validate();
    const Index t_count = surface.rates.rows();
    const Index j_count = surface.rates.cols();
    SmoothingConfig cfg = config;
    if (!cfg.tau0) {
        // one CV selection per surface, on three representative years
        Vector tau_votes(3);
        const Index picks[3] = {0, t_count / 2, t_count - 1};
        for (int k = 0; k < 3; ++k) {
            const Vector m = surface.rates.row(picks[k]);
            const Vector pop = surface.exposures.row(picks[k]);
            const Vector w = inverse_variance_weights(m, pop, *surface.ages);
            tau_votes(k) = select_tau0(surface.ages, m.array().log().matrix(), w, cfg);
        }
        std::sort(tau_votes.data(), tau_votes.data() + 3);
        cfg.tau0 = tau_votes(1);
    }
    Matrix smoothed(j_count, t_count);
    parallel_for(static_cast<std::size_t>(t_count), [&](std::size_t t) {
        const Vector m = surface.rates.row(static_cast<Index>(t));
        const Vector pop = surface.exposures.row(static_cast<Index>(t));
        const Vector w = inverse_variance_weights(m, pop, *surface.ages);
        smoothed.col(static_cast<Index>(t)) =
            smooth_curve(surface.ages, m.array().log().matrix(), w, cfg).values;
    });
    return smoothed;
}

} // namespace mftsc
