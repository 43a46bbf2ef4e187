#include <doctest.h>

#include "mftsc/grid.hpp"
#include "mftsc/rng.hpp"

#include <cmath>

using namespace mftsc;

namespace {

GridFunction constant_fn(const GridPtr& g, double c) {
    return GridFunction(g, Vector::Constant(g->size(), c));
}

GridFunction sampled(const GridPtr& g, double (*f)(double)) {
    Vector v(g->size());
    for (Index j = 0; j < g->size(); ++j) v(j) = f(g->points()(j));
    return GridFunction(g, v);
}

double sqrt2_sin_pi(double x) { return std::sqrt(2.0) * std::sin(M_PI * x); }
double sqrt2_cos_pi(double x) { return std::sqrt(2.0) * std::cos(M_PI * x); }

// quadrature oracle on a much finer grid
double fine_integral(double (*f)(double), double (*g)(double), double a, double b) {
    const Index n = 20001;
    const double dx = (b - a) / static_cast<double>(n - 1);
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
        const double x = a + static_cast<double>(j) * dx;
        const double w = (j == 0 || j == n - 1) ? 0.5 * dx : dx;
        acc += w * f(x) * g(x);
    }
    return acc;
}

} // namespace

TEST_CASE("make_uniform_grid basics") {
    const GridPtr g = make_uniform_grid(201, 0.0, 1.0);
    CHECK(g->spacing() == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(g->points()(0) == 0.0);
    CHECK(g->points()(200) == 1.0);

    const GridPtr minimal = make_uniform_grid(2, 0.0, 1.0);
    CHECK(minimal->points()(0) == 0.0);
    CHECK(minimal->points()(1) == 1.0);

    const GridPtr ages = make_uniform_grid(101, 0.0, 100.0);
    CHECK(ages->size() == 101);
    CHECK(ages->spacing() == doctest::Approx(1.0));
    CHECK(ages->points()(47) == doctest::Approx(47.0));

    CHECK_THROWS_AS(make_uniform_grid(1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_grid(10, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_grid(10, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("grid invariants") {
    const GridPtr g = make_uniform_grid(101, 0.0, 1.0);
    for (Index j = 0; j + 1 < g->size(); ++j)
        CHECK(std::abs(g->points()(j + 1) - g->points()(j) - g->spacing()) < 1e-12);
    CHECK_THROWS_AS(Grid((Vector(3) << 0.0, 0.5, 0.4).finished()), std::invalid_argument);
    CHECK_THROWS_AS(Grid((Vector(3) << 0.0, 0.3, 1.0).finished()), std::invalid_argument);
}

TEST_CASE("inner_product examples") {
    const GridPtr g = make_uniform_grid(201, 0.0, 1.0);
    CHECK(inner_product(constant_fn(g, 1.0), constant_fn(g, 1.0)) == doctest::Approx(1.0));

    const GridFunction s = sampled(g, sqrt2_sin_pi);
    const GridFunction c = sampled(g, sqrt2_cos_pi);
    CHECK(std::abs(inner_product(s, c)) < 1e-4);
    CHECK(inner_product(s, s) ==
          doctest::Approx(fine_integral(sqrt2_sin_pi, sqrt2_sin_pi, 0, 1)).epsilon(1e-4));

    const GridPtr other = make_uniform_grid(201, 0.0, 2.0);
    CHECK_THROWS_AS(inner_product(s, constant_fn(other, 1.0)), std::invalid_argument);
}

TEST_CASE("l2_distance examples") {
    const GridPtr g = make_uniform_grid(201, 0.0, 1.0);
    const GridFunction f = sampled(g, sqrt2_sin_pi);
    CHECK(l2_distance(f, f) == 0.0);
    CHECK(l2_distance(constant_fn(g, 1.0), constant_fn(g, 0.0)) == doctest::Approx(1.0));

    const GridPtr g2 = make_uniform_grid(101, 0.0, 2.0);
    CHECK(l2_distance(constant_fn(g2, 3.0), constant_fn(g2, 0.0)) ==
          doctest::Approx(3.0 * std::sqrt(2.0)));
}

TEST_CASE("inner product is symmetric and bilinear") {
    const GridPtr g = make_uniform_grid(51, 0.0, 1.0);
    auto rng = make_rng(7);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 20; ++rep) {
        Vector a(g->size()), b(g->size()), c(g->size());
        for (Index j = 0; j < g->size(); ++j) {
            a(j) = gauss(rng);
            b(j) = gauss(rng);
            c(j) = gauss(rng);
        }
        const GridFunction fa(g, a), fb(g, b), fc(g, c);
        CHECK(inner_product(fa, fb) == doctest::Approx(inner_product(fb, fa)).epsilon(1e-12));
        const GridFunction combo(g, 2.0 * a + 3.0 * b);
        CHECK(inner_product(combo, fc) ==
              doctest::Approx(2.0 * inner_product(fa, fc) + 3.0 * inner_product(fb, fc))
                  .epsilon(1e-12));
    }
}

TEST_CASE("triangle inequality on random triples") {
    const GridPtr g = make_uniform_grid(51, 0.0, 1.0);
    auto rng = make_rng(8);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 50; ++rep) {
        Vector a(g->size()), b(g->size()), c(g->size());
        for (Index j = 0; j < g->size(); ++j) {
            a(j) = gauss(rng);
            b(j) = gauss(rng);
            c(j) = gauss(rng);
        }
        const GridFunction fa(g, a), fb(g, b), fc(g, c);
        CHECK(l2_distance(fa, fc) <= l2_distance(fa, fb) + l2_distance(fb, fc) + 1e-12);
    }
}

TEST_CASE("quadrature error decays quadratically") {
    // smooth integrand with a known value; halving dx must cut the error 3x+
    const auto integrand = [](double x) { return std::exp(x) * std::sin(3.0 * x); };
    const double exact = fine_integral(
        +[](double x) { return std::exp(x) * std::sin(3.0 * x); },
        +[](double) { return 1.0; }, 0.0, 1.0);
    double errors[2];
    int idx = 0;
    for (const Index n : {51, 101}) {
        const GridPtr g = make_uniform_grid(n, 0.0, 1.0);
        Vector v(n);
        for (Index j = 0; j < n; ++j) v(j) = integrand(g->points()(j));
        errors[idx++] =
            std::abs(inner_product(GridFunction(g, v), constant_fn(g, 1.0)) - exact);
    }
    CHECK(errors[0] / errors[1] >= 3.0);
}

TEST_CASE("panel validation") {
    const GridPtr g = make_uniform_grid(11, 0.0, 1.0);
    FTSPanel panel;
    panel.grid = g;
    panel.labels = {"a", "b"};
    panel.series = {Matrix::Zero(11, 4), Matrix::Zero(11, 4)};
    CHECK_NOTHROW(panel.validate());
    panel.series[1] = Matrix::Zero(11, 3); // ragged
    CHECK_THROWS_AS(panel.validate(), std::invalid_argument);
}
