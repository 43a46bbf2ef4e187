#include <doctest.h>

#include "mftsc/rng.hpp"
#include "mftsc/var.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace mftsc;

TEST_CASE("deterministic recursion is recovered exactly") {
    const Index t_count = 12;
    Matrix scores(t_count, 1);
    scores(0, 0) = 0.0;
    for (Index t = 1; t < t_count; ++t) scores(t, 0) = 0.5 * scores(t - 1, 0) + 1.0;
    const VARModel model = fit_var(scores, 1);
    CHECK(model.order == 1);
    CHECK(model.coef[0](0, 0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(model.intercept(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("white noise selects a first-order model with small coefficients") {
    auto rng = make_rng(5);
    std::normal_distribution<double> gauss;
    const Index t_count = 400;
    Matrix scores(t_count, 2);
    for (Index t = 0; t < t_count; ++t)
        for (Index d = 0; d < 2; ++d) scores(t, d) = gauss(rng);
    const VARModel model = fit_var(scores, 4);
    CHECK(model.order == 1);

    // standard errors from the usual least-squares formula (test-local oracle)
    Matrix x(t_count - 1, 3);
    for (Index t = 1; t < t_count; ++t) {
        x(t - 1, 0) = 1.0;
        x(t - 1, 1) = scores(t - 1, 0);
        x(t - 1, 2) = scores(t - 1, 1);
    }
    const Matrix gram_inv = (x.transpose() * x).inverse();
    for (Index eq = 0; eq < 2; ++eq) {
        const double sigma2 =
            model.residuals.col(eq).squaredNorm() / static_cast<double>(t_count - 1 - 3);
        for (Index lag_var = 0; lag_var < 2; ++lag_var) {
            const double se = std::sqrt(sigma2 * gram_inv(1 + lag_var, 1 + lag_var));
            CHECK(std::abs(model.coef[0](eq, lag_var)) <= 3.0 * se);
        }
    }
}

TEST_CASE("short samples fall back to first order") {
    Matrix scores(5, 1);
    scores << 0.3, -0.1, 0.5, 0.2, -0.4;
    const VARModel model = fit_var(scores, 5);
    CHECK(model.order == 1);
}

TEST_CASE("forecast recursions") {
    SUBCASE("zero coefficients return the intercept") {
        VARModel model;
        model.order = 1;
        model.dimension = 2;
        model.intercept = (Vector(2) << 1.5, -2.0).finished();
        model.coef = {Matrix::Zero(2, 2)};
        model.stable = true;
        const Matrix fc = forecast_scores(model, Matrix::Zero(1, 2), 4);
        for (Index s = 0; s < 4; ++s) {
            CHECK(fc(s, 0) == doctest::Approx(1.5));
            CHECK(fc(s, 1) == doctest::Approx(-2.0));
        }
    }

    SUBCASE("scalar autoregression halves each step") {
        VARModel model;
        model.order = 1;
        model.dimension = 1;
        model.intercept = Vector::Zero(1);
        model.coef = {Matrix::Constant(1, 1, 0.5)};
        const Matrix fc = forecast_scores(model, Matrix::Constant(1, 1, 2.0), 3);
        CHECK(fc(0, 0) == doctest::Approx(1.0));
        CHECK(fc(1, 0) == doctest::Approx(0.5));
        CHECK(fc(2, 0) == doctest::Approx(0.25));
    }

    SUBCASE("explosive models still forecast, flagged unstable") {
        VARModel model;
        model.order = 1;
        model.dimension = 1;
        model.intercept = Vector::Zero(1);
        model.coef = {Matrix::Constant(1, 1, 1.2)};
        CHECK(companion_spectral_radius(model) > 1.0);
        model.stable = companion_spectral_radius(model) < 1.0;
        CHECK(!model.stable);
        const Matrix fc = forecast_scores(model, Matrix::Constant(1, 1, 1.0), 3);
        CHECK(fc(2, 0) == doctest::Approx(1.2 * 1.2 * 1.2));
    }

    SUBCASE("horizon must be positive") {
        VARModel model;
        model.order = 1;
        model.dimension = 1;
        model.intercept = Vector::Zero(1);
        model.coef = {Matrix::Zero(1, 1)};
        CHECK_THROWS_AS(forecast_scores(model, Matrix::Zero(1, 1), 0),
                        std::invalid_argument);
    }
}

TEST_CASE("h+1-step forecasts compose with one-step forecasts") {
    auto rng = make_rng(8);
    std::normal_distribution<double> gauss;
    Matrix scores(60, 2);
    scores.row(0) << gauss(rng), gauss(rng);
    for (Index t = 1; t < 60; ++t) {
        scores(t, 0) = 0.6 * scores(t - 1, 0) + 0.1 * scores(t - 1, 1) + 0.3 * gauss(rng);
        scores(t, 1) = -0.2 * scores(t - 1, 0) + 0.5 * scores(t - 1, 1) + 0.3 * gauss(rng);
    }
    const VARModel model = fit_var(scores, 2);
    const Matrix direct = forecast_scores(model, scores.bottomRows(model.order), 5);

    // roll the state forward 4 steps, then take one more
    Matrix state(model.order, 2);
    state = scores.bottomRows(model.order);
    Matrix rolled = state;
    for (Index s = 0; s < 4; ++s) {
        const Matrix one = forecast_scores(model, rolled, 1);
        if (model.order > 1) {
            Matrix next(model.order, 2);
            next.topRows(model.order - 1) = rolled.bottomRows(model.order - 1);
            next.row(model.order - 1) = one.row(0);
            rolled = next;
        } else {
            rolled = one;
        }
    }
    const Matrix last = forecast_scores(model, rolled, 1);
    CHECK((last.row(0) - direct.row(4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate designs use the ridge fallback") {
    Matrix scores = Matrix::Zero(20, 2); // perfectly collinear columns
    for (Index t = 0; t < 20; ++t) {
        scores(t, 0) = static_cast<double>(t % 3);
        scores(t, 1) = 2.0 * scores(t, 0);
    }
    const VARModel model = fit_var(scores, 1);
    CHECK(model.ridge_used);
    CHECK(model.residuals.allFinite());
}
