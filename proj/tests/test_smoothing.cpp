#include <doctest.h>

#include "mftsc/rng.hpp"
#include "mftsc/simplex.hpp"
#include "mftsc/smoothing.hpp"

#include <cmath>

using namespace mftsc;

TEST_CASE("inverse variance weights") {
    const GridPtr ages = make_uniform_grid(3, 0.0, 2.0);
    Vector m(3), pop(3);
    m << 0.01, 1.0, 0.001;
    pop << 10000.0, 1.0, 50000.0;
    const Vector w = inverse_variance_weights(m, pop, *ages);
    CHECK(w(0) == doctest::Approx(100.0));
    CHECK(w(1) == doctest::Approx(1.0));
    CHECK(w(2) == doctest::Approx(50.0));

    Vector bad = m;
    bad(1) = 0.0;
    CHECK_THROWS_WITH_AS(inverse_variance_weights(bad, pop, *ages),
                         doctest::Contains("age 1"), std::invalid_argument);
    Vector bad_pop = pop;
    bad_pop(2) = -1.0;
    CHECK_THROWS_WITH_AS(inverse_variance_weights(m, bad_pop, *ages),
                         doctest::Contains("age 2"), std::invalid_argument);
}

TEST_CASE("smooth_curve identity on feasible input with zero penalty") {
    const GridPtr ages = make_uniform_grid(21, 55.0, 75.0);
    Vector f(21);
    for (Index j = 0; j < 21; ++j) {
        const double x = ages->points()(j);
        f(j) = -8.0 + 0.05 * x + 0.001 * x * x; // smooth, increasing
    }
    SmoothingConfig cfg;
    cfg.tau0 = 0.0;
    const GridFunction out = smooth_curve(ages, f, Vector::Ones(21), cfg);
    CHECK((out.values - f).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("smooth_curve maps constants to themselves") {
    const GridPtr ages = make_uniform_grid(15, 0.0, 14.0);
    const Vector f = Vector::Constant(15, -3.7);
    for (const double tau : {0.0, 1.0, 100.0}) {
        SmoothingConfig cfg;
        cfg.tau0 = tau;
        const GridFunction out = smooth_curve(ages, f, Vector::Ones(15), cfg);
        CHECK((out.values - f).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("large penalty approaches the best weighted-L1 affine fit") {
    // 10-point instance; oracle enumerates lines through data-point pairs
    // (a weighted-L1 affine fit always passes through two of them)
    const GridPtr ages = make_uniform_grid(10, 0.0, 9.0);
    auto rng = make_rng(12);
    std::normal_distribution<double> gauss(0.0, 0.3);
    Vector f(10), w(10);
    for (Index j = 0; j < 10; ++j) {
        const double x = ages->points()(j);
        f(j) = 0.4 * x + (j < 5 ? 0.2 * x : 1.0) + gauss(rng);
        w(j) = 1.0 + 0.1 * static_cast<double>(j);
    }
    double oracle = std::numeric_limits<double>::infinity();
    for (Index a = 0; a < 10; ++a)
        for (Index b = a + 1; b < 10; ++b) {
            const double x1 = ages->points()(a), x2 = ages->points()(b);
            const double slope = (f(b) - f(a)) / (x2 - x1);
            double err = 0.0;
            for (Index j = 0; j < 10; ++j)
                err += w(j) * std::abs(f(j) - (f(a) + slope * (ages->points()(j) - x1)));
            oracle = std::min(oracle, err);
        }

    SmoothingConfig cfg;
    cfg.tau0 = 1e9;
    cfg.monotone_from.reset();
    const GridFunction out = smooth_curve(ages, f, w, cfg);
    const double data_term = w.cwiseProduct((f - out.values).cwiseAbs()).sum();
    CHECK(data_term == doctest::Approx(oracle).epsilon(1e-6));
    // second differences vanish at the affine limit
    for (Index j = 0; j + 2 < 10; ++j)
        CHECK(std::abs(out.values(j + 2) - 2.0 * out.values(j + 1) + out.values(j)) < 1e-6);
}

TEST_CASE("monotone constraint holds above the threshold") {
    const GridPtr ages = make_uniform_grid(41, 40.0, 80.0);
    auto rng = make_rng(77);
    std::normal_distribution<double> gauss(0.0, 0.5);
    Vector f(41);
    for (Index j = 0; j < 41; ++j) f(j) = -5.0 + gauss(rng); // noisy, non-monotone
    SmoothingConfig cfg;
    cfg.tau0 = 0.5;
    const GridFunction out = smooth_curve(ages, f, Vector::Ones(41), cfg);
    for (Index j = 0; j + 1 < 41; ++j)
        if (ages->points()(j) >= 65.0)
            CHECK(out.values(j + 1) >= out.values(j) - 1e-9);
}

TEST_CASE("solver objective is nonincreasing across iterations") {
    const GridPtr ages = make_uniform_grid(12, 0.0, 11.0);
    auto rng = make_rng(5);
    std::normal_distribution<double> gauss;
    Vector f(12);
    for (Index j = 0; j < 12; ++j) f(j) = gauss(rng);
    // build the LP through the public entry point and inspect the trace via
    // a plain simplex problem of the same family
    Matrix a(4, 3);
    a << 1, 1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1;
    Vector b(4), c(3);
    b << 1, 1, 1, 2;
    c << 1, 2, 3;
    const SimplexResult res = solve_lp_ge(a, b, c);
    for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
        CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-9);
    CHECK(res.objective == doctest::Approx(3.0)); // optimum at x = (1, 1, 0)
    CHECK((a * res.x - b).minCoeff() >= -1e-9);
}

TEST_CASE("doubling weights leaves the zero-penalty minimizer unchanged") {
    const GridPtr ages = make_uniform_grid(16, 50.0, 65.0);
    auto rng = make_rng(21);
    std::normal_distribution<double> gauss;
    Vector f(16), w(16);
    for (Index j = 0; j < 16; ++j) {
        f(j) = gauss(rng);
        w(j) = 1.0 + std::abs(gauss(rng));
    }
    SmoothingConfig cfg;
    cfg.tau0 = 0.0;
    cfg.monotone_from.reset();
    const GridFunction a = smooth_curve(ages, f, w, cfg);
    const GridFunction b = smooth_curve(ages, f, 2.0 * w, cfg);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("objective at the solution never exceeds a feasible input's") {
    const GridPtr ages = make_uniform_grid(25, 55.0, 79.0);
    auto rng = make_rng(3);
    std::normal_distribution<double> gauss(0.0, 0.2);
    Vector f(25);
    for (Index j = 0; j < 25; ++j) f(j) = -6.0 + 0.04 * static_cast<double>(j) + gauss(rng);
    // make the raw input feasible: force monotone above 65
    for (Index j = 1; j < 25; ++j)
        if (ages->points()(j - 1) >= 65.0) f(j) = std::max(f(j), f(j - 1));
    SmoothingConfig cfg;
    cfg.tau0 = 2.0;
    const Vector w = Vector::Ones(25);
    const GridFunction out = smooth_curve(ages, f, w, cfg);
    CHECK(smoothing_objective(*ages, f, w, 2.0, out.values) <=
          smoothing_objective(*ages, f, w, 2.0, f) + 1e-9);
}

TEST_CASE("tau0 cross-validation runs and returns a grid value") {
    const GridPtr ages = make_uniform_grid(20, 0.0, 19.0);
    auto rng = make_rng(9);
    std::normal_distribution<double> gauss(0.0, 0.4);
    Vector f(20);
    for (Index j = 0; j < 20; ++j) f(j) = 0.1 * static_cast<double>(j) + gauss(rng);
    SmoothingConfig cfg;
    cfg.monotone_from.reset();
    const double tau = select_tau0(ages, f, Vector::Ones(20), cfg);
    CHECK(tau >= 1e-3);
    CHECK(tau <= 1e2);
}

TEST_CASE("smooth_surface handles a small noisy surface") {
    const GridPtr ages = make_uniform_grid(12, 60.0, 71.0);
    RawMortalitySurface surface;
    surface.ages = ages;
    surface.rates.resize(3, 12);
    surface.exposures = Matrix::Constant(3, 12, 5000.0);
    auto rng = make_rng(31);
    std::normal_distribution<double> gauss(0.0, 0.05);
    for (Index t = 0; t < 3; ++t)
        for (Index j = 0; j < 12; ++j)
            surface.rates(t, j) = std::exp(-4.0 + 0.08 * static_cast<double>(j) + gauss(rng));
    SmoothingConfig cfg;
    cfg.tau0 = 1.0;
    const Matrix smoothed = smooth_surface(surface, cfg);
    CHECK(smoothed.rows() == 12);
    CHECK(smoothed.cols() == 3);
    for (Index t = 0; t < 3; ++t)
        for (Index j = 0; j + 1 < 12; ++j) // ages above 65: nondecreasing
            if (ages->points()(j) >= 65.0)
                CHECK(smoothed(j + 1, t) >= smoothed(j, t) - 1e-9);
}
