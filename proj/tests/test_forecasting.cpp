#include <doctest.h>

#include "mftsc/forecasting.hpp"
#include "mftsc/rng.hpp"
#include "mftsc/simulation.hpp"

#include <cmath>

using namespace mftsc;

TEST_CASE("interval score formula") {
    const GridPtr g = make_uniform_grid(11, 0.0, 1.0);
    const GridFunction lb(g, Vector::Zero(11));
    const GridFunction ub(g, Vector::Ones(11));
    CHECK(interval_score(lb, ub, GridFunction(g, Vector::Constant(11, 0.5)), 0.2) ==
          doctest::Approx(1.0));
    CHECK(interval_score(lb, ub, GridFunction(g, Vector::Constant(11, 1.5)), 0.2) ==
          doctest::Approx(6.0));
    CHECK(interval_score(lb, ub, GridFunction(g, Vector::Constant(11, -0.2)), 0.2) ==
          doctest::Approx(3.0));
    CHECK_THROWS_AS(interval_score(ub, lb, GridFunction(g, Vector::Zero(11)), 0.2),
                    std::invalid_argument);
}

TEST_CASE("interval score prefers covering bands and penalizes slack") {
    const GridPtr g = make_uniform_grid(5, 0.0, 1.0);
    const GridFunction actual(g, Vector::Constant(5, 0.4));
    const GridFunction lb(g, Vector::Zero(5));
    const GridFunction ub(g, Vector::Ones(5));
    const double covered = interval_score(lb, ub, actual, 0.2);
    CHECK(covered == doctest::Approx(1.0)); // width only
    // widening a band that already covers strictly worsens the score
    const GridFunction wider(g, Vector::Constant(5, 1.5));
    CHECK(interval_score(lb, wider, actual, 0.2) > covered);
    // any actual outside scores worse than the same band covering
    const GridFunction outside(g, Vector::Constant(5, 1.2));
    CHECK(interval_score(lb, ub, outside, 0.2) > covered);
}

TEST_CASE("rmsfe examples") {
    const GridPtr g = make_uniform_grid(21, 0.0, 1.0);
    std::vector<GridFunction> actual, forecast;
    for (int w = 0; w < 3; ++w) {
        actual.emplace_back(g, Vector::Constant(21, 1.0 + w));
        forecast.emplace_back(g, Vector::Constant(21, 1.0 + w));
    }
    CHECK(rmsfe(actual, forecast) == 0.0);

    for (auto& f : forecast) f.values.array() += 0.01;
    CHECK(rmsfe(actual, forecast) == doctest::Approx(0.01));

    // two-point hand computation
    const GridPtr g2 = make_uniform_grid(2, 0.0, 1.0);
    std::vector<GridFunction> a2{GridFunction(g2, (Vector(2) << 1.0, 2.0).finished())};
    std::vector<GridFunction> f2{GridFunction(g2, (Vector(2) << 1.5, 1.0).finished())};
    CHECK(rmsfe(a2, f2) == doctest::Approx(std::sqrt((0.25 + 1.0) / 2.0)));

    CHECK_THROWS_AS(rmsfe(a2, std::vector<GridFunction>{}), std::invalid_argument);
}

TEST_CASE("rmsfe is invariant under a consistent age permutation") {
    const GridPtr g = make_uniform_grid(13, 0.0, 1.0);
    auto rng = make_rng(4);
    std::normal_distribution<double> gauss;
    Vector a(13), f(13);
    for (Index j = 0; j < 13; ++j) {
        a(j) = gauss(rng);
        f(j) = gauss(rng);
    }
    Vector a_rev = a.reverse();
    Vector f_rev = f.reverse();
    const double base = rmsfe({GridFunction(g, a)}, {GridFunction(g, f)});
    const double reversed = rmsfe({GridFunction(g, a_rev)}, {GridFunction(g, f_rev)});
    CHECK(base == doctest::Approx(reversed).epsilon(1e-12));
}

TEST_CASE("bootstrap interval on a symmetric two-point error law") {
    const GridPtr g = make_uniform_grid(9, 0.0, 1.0);
    Matrix errors(9, 10);
    for (Index j = 0; j < 9; ++j)
        for (Index s = 0; s < 10; ++s) errors(j, s) = s % 2 == 0 ? -1.0 : 1.0;
    const GridFunction forecast(g, Vector::Constant(9, 5.0));
    const PredictionInterval pi = bootstrap_prediction_interval(errors, forecast, 0.2, 500, 7);
    CHECK(!pi.degenerate);
    for (Index j = 0; j < 9; ++j) {
        CHECK(pi.lower.values(j) < 5.0);
        CHECK(pi.upper.values(j) > 5.0);
        CHECK(std::abs((5.0 - pi.lower.values(j)) - (pi.upper.values(j) - 5.0)) < 0.2);
    }
    // in-sample coverage at theta
    Index covered = 0;
    for (Index j = 0; j < 9; ++j)
        for (Index s = 0; s < 10; ++s)
            if (errors(j, s) >= pi.lower.values(j) - 5.0 &&
                errors(j, s) <= pi.upper.values(j) - 5.0)
                ++covered;
    CHECK(static_cast<double>(covered) / 90.0 >= 0.8);
}

TEST_CASE("theta search is a no-op when raw quantiles already cover") {
    const GridPtr g = make_uniform_grid(5, 0.0, 1.0);
    auto rng = make_rng(13);
    std::normal_distribution<double> gauss;
    Matrix errors(5, 400);
    for (Index j = 0; j < 5; ++j)
        for (Index s = 0; s < 400; ++s) errors(j, s) = gauss(rng);
    const GridFunction forecast(g, Vector::Zero(5));
    // alpha = 0.5 quantiles cover well beyond 50% once scaled by theta = 1
    const PredictionInterval pi =
        bootstrap_prediction_interval(errors, forecast, 0.5, 800, 3);
    CHECK(pi.theta <= 1.0 + 1e-3 + 1e-12);
}

TEST_CASE("degenerate all-zero errors give a zero-width flagged interval") {
    const GridPtr g = make_uniform_grid(5, 0.0, 1.0);
    const Matrix errors = Matrix::Zero(5, 12);
    const GridFunction forecast(g, Vector::Constant(5, 2.0));
    const PredictionInterval pi = bootstrap_prediction_interval(errors, forecast, 0.2, 100, 1);
    CHECK(pi.degenerate);
    CHECK((pi.upper.values - pi.lower.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("univariate forecaster reproduces constant dynamics") {
    const GridPtr g = make_uniform_grid(31, 0.0, 1.0);
    const Vector shape = evaluate_basis(BasisFn{false, 1}, *g);
    Matrix series(31, 20);
    for (Index t = 0; t < 20; ++t) series.col(t) = 2.0 * shape; // constant scores
    const UnivariateFit fit = fit_univariate(g, series, 0.9, LongRunConfig{});
    const auto fc = forecast_univariate(fit, 3);
    for (const auto& f : fc)
        CHECK((f.values - 2.0 * shape).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("forecast_curves contract") {
    ScenarioConfig cfg = scenario_config("C4d");
    cfg.objects_per_cluster = 6;
    cfg.timepoints = 30;
    cfg.grid_points = 61;
    const LabeledPanel data = generate_scenario(cfg, 10);
    FTSPanel cluster;
    cluster.grid = data.panel.grid;
    for (Index i = 0; i < 6; ++i) {
        cluster.labels.push_back(data.panel.labels[static_cast<std::size_t>(i)]);
        cluster.series.push_back(data.panel.series[static_cast<std::size_t>(i)]);
    }
    const PanelModelFit fit = fit_panel_model(cluster, 0.9, 0.9, 0.9, LongRunConfig{});
    CHECK_THROWS_AS(forecast_curves(fit, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(forecast_curves(fit, 6, 2), std::invalid_argument);
    const auto fc = forecast_curves(fit, 0, 4);
    CHECK(fc.size() == 4);
    for (const auto& f : fc) CHECK(f.values.allFinite());
}

TEST_CASE("constant-score panels forecast their last observed curve") {
    const GridPtr g = make_uniform_grid(41, 0.0, 1.0);
    const Vector rho = evaluate_basis(BasisFn{false, 1}, *g);
    const Vector psi = evaluate_basis(BasisFn{false, 3}, *g);
    FTSPanel panel;
    panel.grid = g;
    auto rng = make_rng(2);
    std::normal_distribution<double> gauss;
    for (Index i = 0; i < 3; ++i) {
        Matrix y(41, 12);
        const double a = gauss(rng), b = gauss(rng);
        for (Index t = 0; t < 12; ++t)
            y.col(t) = Vector::Constant(41, 1.0 + 0.3 * static_cast<double>(i)) + a * rho +
                       b * psi; // constant in t
        panel.labels.push_back("o" + std::to_string(i));
        panel.series.push_back(std::move(y));
    }
    const PanelModelFit fit = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    for (Index i = 0; i < 3; ++i) {
        const auto fc = forecast_curves(fit, i, 2);
        for (const auto& f : fc)
            CHECK((f.values - panel.series[static_cast<std::size_t>(i)].col(11))
                      .cwiseAbs()
                      .maxCoeff() < 1e-6);
    }
}

TEST_CASE("expanding window evaluation count structure") {
    ScenarioConfig cfg = scenario_config("C1a");
    cfg.objects_per_cluster = 3;
    cfg.timepoints = 15;
    cfg.grid_points = 31;
    const LabeledPanel data = generate_scenario(cfg, 5);
    EvaluationOptions options;
    options.cluster.initial.seed = 3;

    SUBCASE("one holdout point gives exactly one horizon") {
        const ForecastReport report =
            expanding_window_evaluation(data.panel, 14, ForecastMethod::UTS, options);
        CHECK(report.horizons.size() == 1);
        CHECK(report.rmsfe.size() == 1);
        CHECK(report.rmsfe[0] >= 0.0);
    }

    SUBCASE("three holdout points give horizons 1..3") {
        const ForecastReport report =
            expanding_window_evaluation(data.panel, 12, ForecastMethod::UTS, options);
        REQUIRE(report.horizons.size() == 3);
        CHECK(report.horizons[0] == 1);
        CHECK(report.horizons[2] == 3);
        for (const double v : report.rmsfe) CHECK(std::isfinite(v));
    }

    SUBCASE("insufficient data is rejected") {
        CHECK_THROWS_AS(
            expanding_window_evaluation(data.panel, 15, ForecastMethod::UTS, options),
            std::invalid_argument);
    }
}

TEST_CASE("clustered forecasts beat per-object forecasts on shared-structure data") {
    ScenarioConfig cfg = scenario_config("C4d");
    cfg.objects_per_cluster = 6;
    cfg.timepoints = 40;
    cfg.grid_points = 61;
    cfg.shared_trend = true; // the pooling advantage presumes a common trend
    const LabeledPanel data = generate_scenario(cfg, 77);
    EvaluationOptions options;
    options.cluster.initial.seed = 5;
    const ForecastReport uts =
        expanding_window_evaluation(data.panel, 35, ForecastMethod::UTS, options);
    const ForecastReport mftsc =
        expanding_window_evaluation(data.panel, 35, ForecastMethod::MFTSC, options);
    REQUIRE(uts.rmsfe.size() == mftsc.rmsfe.size());
    double uts_mean = 0.0, mftsc_mean = 0.0;
    for (std::size_t h = 0; h < uts.rmsfe.size(); ++h) {
        uts_mean += uts.rmsfe[h];
        mftsc_mean += mftsc.rmsfe[h];
    }
    CHECK(mftsc_mean <= uts_mean); // direction check on one seed
}

TEST_CASE("interval evaluation emits finite scores when enough errors exist") {
    ScenarioConfig cfg = scenario_config("C1a");
    cfg.objects_per_cluster = 3;
    cfg.timepoints = 30;
    cfg.grid_points = 21;
    const LabeledPanel data = generate_scenario(cfg, 15);
    EvaluationOptions options;
    options.with_intervals = true;
    options.bootstrap_draws = 200;
    options.seed = 9;
    options.error_origin = 10;
    const ForecastReport report =
        expanding_window_evaluation(data.panel, 25, ForecastMethod::UTS, options);
    REQUIRE(!report.mean_interval_score.empty());
    CHECK(std::isfinite(report.mean_interval_score[0]));
    CHECK(report.mean_interval_score[0] > 0.0);
}
