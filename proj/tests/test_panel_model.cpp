#include <doctest.h>

#include "mftsc/panel_model.hpp"
#include "mftsc/rng.hpp"
#include "mftsc/simulation.hpp"

#include <cmath>

using namespace mftsc;

namespace {

FTSPanel random_panel(const GridPtr& g, Index i_count, Index t_count, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss;
    FTSPanel panel;
    panel.grid = g;
    for (Index i = 0; i < i_count; ++i) {
        Matrix y(g->size(), t_count);
        for (Index t = 0; t < t_count; ++t)
            for (Index j = 0; j < g->size(); ++j) y(j, t) = gauss(rng);
        panel.labels.push_back("obj" + std::to_string(i));
        panel.series.push_back(std::move(y));
    }
    return panel;
}

void check_decomposition_identities(const FTSPanel& panel, const PanelDecomposition& dec) {
    const Index i_count = panel.n_objects();
    const Index t_count = panel.n_times();
    CHECK(dec.eta.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(dec.r.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    Matrix u_sum_i = Matrix::Zero(panel.grid->size(), t_count);
    for (const auto& u : dec.u) {
        u_sum_i += u;
        CHECK(u.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10); // sum over t
    }
    CHECK(u_sum_i.cwiseAbs().maxCoeff() < 1e-10); // sum over i
    for (Index i = 0; i < i_count; ++i) {
        const Matrix rebuilt = ((dec.u[static_cast<std::size_t>(i)] + dec.r).colwise() +
                                (dec.mu.values + dec.eta.col(i)));
        CHECK((rebuilt - panel.series[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

} // namespace

TEST_CASE("decompose_panel recovers constructed components") {
    const GridPtr g = make_uniform_grid(21, 0.0, 1.0);
    const Index i_count = 4, t_count = 6;
    auto rng = make_rng(2);
    std::normal_distribution<double> gauss;

    // components built to satisfy the sum-to-zero constraints exactly
    Vector a(g->size());
    for (Index j = 0; j < g->size(); ++j) a(j) = gauss(rng);
    Matrix b(g->size(), i_count), c(g->size(), t_count);
    for (Index j = 0; j < g->size(); ++j) {
        for (Index i = 0; i < i_count; ++i) b(j, i) = gauss(rng);
        for (Index t = 0; t < t_count; ++t) c(j, t) = gauss(rng);
    }
    b.colwise() -= b.rowwise().mean().eval();
    c.colwise() -= c.rowwise().mean().eval();
    std::vector<Matrix> d(i_count, Matrix(g->size(), t_count));
    for (Index i = 0; i < i_count; ++i)
        for (Index t = 0; t < t_count; ++t)
            for (Index j = 0; j < g->size(); ++j) d[i](j, t) = gauss(rng);
    // double-center d over i and t
    Matrix d_mean_i = Matrix::Zero(g->size(), t_count);
    for (const auto& m : d) d_mean_i += m;
    d_mean_i /= static_cast<double>(i_count);
    for (auto& m : d) m -= d_mean_i;
    for (auto& m : d) m.colwise() -= m.rowwise().mean().eval();

    FTSPanel panel;
    panel.grid = g;
    for (Index i = 0; i < i_count; ++i) {
        Matrix y = d[static_cast<std::size_t>(i)] + c;
        y.colwise() += (a + b.col(i)).eval();
        panel.labels.push_back("x" + std::to_string(i));
        panel.series.push_back(std::move(y));
    }

    const PanelDecomposition dec = decompose_panel(panel);
    CHECK((dec.mu.values - a).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((dec.eta - b).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((dec.r - c).cwiseAbs().maxCoeff() < 1e-10);
    for (Index i = 0; i < i_count; ++i)
        CHECK((dec.u[static_cast<std::size_t>(i)] - d[static_cast<std::size_t>(i)])
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
}

TEST_CASE("decompose_panel on a constant panel") {
    const GridPtr g = make_uniform_grid(11, 0.0, 1.0);
    FTSPanel panel;
    panel.grid = g;
    for (Index i = 0; i < 3; ++i) {
        panel.labels.push_back("c" + std::to_string(i));
        panel.series.push_back(Matrix::Constant(11, 5, 5.0));
    }
    const PanelDecomposition dec = decompose_panel(panel);
    CHECK((dec.mu.values.array() - 5.0).abs().maxCoeff() < 1e-12);
    CHECK(dec.eta.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dec.r.cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& u : dec.u) CHECK(u.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decompose_panel identities hold on random panels") {
    const GridPtr g = make_uniform_grid(13, 0.0, 1.0);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const FTSPanel panel = random_panel(g, 5, 7, seed);
        check_decomposition_identities(panel, decompose_panel(panel));
    }
}

TEST_CASE("joint score projection") {
    const GridPtr g = make_uniform_grid(201, 0.0, 1.0);
    EigenSystem r_basis, u_basis;
    r_basis.grid = u_basis.grid = g;
    r_basis.eigenvalues = Vector::Ones(1);
    u_basis.eigenvalues = Vector::Ones(1);
    r_basis.eigenfunctions = evaluate_basis(BasisFn{false, 1}, *g);
    u_basis.eigenfunctions = evaluate_basis(BasisFn{false, 2}, *g);

    SUBCASE("orthogonal levels split exactly") {
        const Matrix q = cross_basis_matrix(*g, r_basis.eigenfunctions,
                                            u_basis.eigenfunctions);
        const GridFunction demeaned(
            g, 2.0 * r_basis.eigenfunctions.col(0) + 3.0 * u_basis.eigenfunctions.col(0));
        const auto [xi, zeta] = joint_score_projection(demeaned, r_basis, 1, u_basis, 1, q);
        CHECK(xi(0) == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(zeta(0) == doctest::Approx(3.0).epsilon(1e-4));
    }

    SUBCASE("zero curve gives zero scores") {
        const Matrix q = cross_basis_matrix(*g, r_basis.eigenfunctions,
                                            u_basis.eigenfunctions);
        const GridFunction demeaned(g, Vector::Zero(201));
        const auto [xi, zeta] = joint_score_projection(demeaned, r_basis, 1, u_basis, 1, q);
        CHECK(std::abs(xi(0)) < 1e-12);
        CHECK(std::abs(zeta(0)) < 1e-12);
    }

    SUBCASE("fully aliased bases return the minimum-norm split") {
        EigenSystem aliased = r_basis;
        const Matrix q =
            cross_basis_matrix(*g, r_basis.eigenfunctions, aliased.eigenfunctions);
        const GridFunction demeaned(g, 4.0 * r_basis.eigenfunctions.col(0));
        const auto [xi, zeta] = joint_score_projection(demeaned, r_basis, 1, aliased, 1, q);
        CHECK(xi(0) == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(zeta(0) == doctest::Approx(2.0).epsilon(1e-3));
    }
}

TEST_CASE("stacked projection equals independent projections when Q is zero") {
    const GridPtr g = make_uniform_grid(101, 0.0, 1.0);
    EigenSystem r_basis, u_basis;
    r_basis.grid = u_basis.grid = g;
    r_basis.eigenvalues = Vector::Ones(2);
    u_basis.eigenvalues = Vector::Ones(2);
    r_basis.eigenfunctions.resize(101, 2);
    r_basis.eigenfunctions.col(0) = evaluate_basis(BasisFn{false, 1}, *g);
    r_basis.eigenfunctions.col(1) = evaluate_basis(BasisFn{true, 1}, *g);
    u_basis.eigenfunctions.resize(101, 2);
    u_basis.eigenfunctions.col(0) = evaluate_basis(BasisFn{false, 2}, *g);
    u_basis.eigenfunctions.col(1) = evaluate_basis(BasisFn{true, 2}, *g);

    auto rng = make_rng(23);
    std::normal_distribution<double> gauss;
    Vector curve(101);
    for (Index j = 0; j < 101; ++j) curve(j) = gauss(rng);
    const GridFunction demeaned(g, curve);

    const auto [xi, zeta] = joint_score_projection(demeaned, r_basis, 2, u_basis, 2,
                                                   Matrix::Zero(2, 2));
    const Vector xi_direct = project_scores(demeaned, r_basis, 2);
    const Vector zeta_direct = project_scores(demeaned, u_basis, 2);
    CHECK((xi - xi_direct).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((zeta - zeta_direct).cwiseAbs().maxCoeff() < 1e-10);
}

namespace {

// model-faithful noiseless panel: one common trend shared by every object,
// object-specific trends on an orthogonal basis, explicit mean offsets
FTSPanel shared_trend_panel(Index i_count, Index t_count, std::uint64_t seed,
                            Index grid_points = 201) {
    const GridPtr g = make_uniform_grid(grid_points, 0.0, 1.0);
    Matrix rho(g->size(), 2), psi(g->size(), 2), phi_basis(g->size(), 1);
    rho.col(0) = evaluate_basis(BasisFn{false, 1}, *g);
    rho.col(1) = evaluate_basis(BasisFn{true, 1}, *g);
    psi.col(0) = evaluate_basis(BasisFn{false, 3}, *g);
    psi.col(1) = evaluate_basis(BasisFn{true, 3}, *g);
    phi_basis.col(0) = evaluate_basis(BasisFn{false, 5}, *g);

    Matrix xi(t_count, 2);
    xi.col(0) = simulate_ar1(t_count, 0.7, 1.0, substream(seed, 1));
    xi.col(1) = simulate_ar1(t_count, 0.3, 1.0, substream(seed, 2));
    xi.rowwise() -= xi.colwise().mean().eval(); // identified up to score means

    auto rng = make_rng(substream(seed, 3));
    std::normal_distribution<double> gauss;
    FTSPanel panel;
    panel.grid = g;
    const Matrix common = rho * xi.transpose(); // shared across objects
    for (Index i = 0; i < i_count; ++i) {
        Matrix zeta(t_count, 2);
        zeta.col(0) = simulate_ar1(t_count, 0.5, 1.0, substream(seed, 10 + static_cast<std::uint64_t>(i)));
        zeta.col(1) = simulate_ar1(t_count, 0.2, 1.0, substream(seed, 100 + static_cast<std::uint64_t>(i)));
        zeta.rowwise() -= zeta.colwise().mean().eval();
        Matrix y = common + psi * zeta.transpose();
        y.colwise() += (1.0 + 0.8 * gauss(rng)) * phi_basis.col(0);
        panel.labels.push_back("s" + std::to_string(i));
        panel.series.push_back(std::move(y));
    }
    return panel;
}

} // namespace

TEST_CASE("fit recovers a noiseless in-span panel") {
    const FTSPanel panel = shared_trend_panel(20, 200, 31);
    const PanelModelFit fit = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    double worst = 0.0;
    for (Index i = 0; i < 20; ++i)
        for (Index t = 0; t < 200; t += 37) {
            const GridFunction rebuilt = reconstruct_curve(fit, i, t);
            const Vector truth = panel.series[static_cast<std::size_t>(i)].col(t);
            worst = std::max(worst, l2_norm(*fit.grid, truth - rebuilt.values) /
                                        l2_norm(*fit.grid, truth));
        }
    CHECK(worst < 1e-3);
}

TEST_CASE("degenerate level: identical object means give M = 1 with tiny scores") {
    const GridPtr g = make_uniform_grid(51, 0.0, 1.0);
    FTSPanel panel;
    panel.grid = g;
    const Vector r_shape = evaluate_basis(BasisFn{false, 1}, *g);
    // alternating +/- scores with even T make every temporal mean exactly zero
    for (Index i = 0; i < 4; ++i) {
        const double scale = 1.0 + 0.5 * static_cast<double>(i);
        Matrix y(51, 12);
        for (Index t = 0; t < 12; ++t)
            y.col(t) = (t % 2 == 0 ? scale : -scale) * r_shape;
        panel.labels.push_back("o" + std::to_string(i));
        panel.series.push_back(std::move(y));
    }
    const PanelModelFit fit = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    CHECK(fit.m == 1);
    CHECK(fit.eta_basis.eigenvalues(0) < 1e-10);
    CHECK(fit.gamma.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero-score reconstruction returns the grand mean") {
    const GridPtr g = make_uniform_grid(31, 0.0, 1.0);
    FTSPanel panel = random_panel(g, 3, 8, 5);
    PanelModelFit fit = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    fit.gamma.setZero();
    fit.xi.setZero();
    for (auto& z : fit.zeta) z.setZero();
    const GridFunction rebuilt = reconstruct_curve(fit, 1, 3);
    CHECK((rebuilt.values - fit.decomposition.mu.values).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(reconstruct_curve(fit, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(reconstruct_curve(fit, 0, 8), std::invalid_argument);
}

TEST_CASE("reconstruction error is nonincreasing in the retained counts") {
    const FTSPanel panel = shared_trend_panel(6, 30, 8, 61);
    LongRunConfig lr;
    lr.bandwidth = 2.0;
    double prev = std::numeric_limits<double>::infinity();
    for (Index n : {Index(1), Index(2)}) {
        FitOptions opts;
        opts.force_m = n;
        opts.force_n1 = n;
        opts.force_n2 = n;
        const PanelModelFit fit = fit_panel_model(panel, 0.9, 0.9, 0.9, lr, opts);
        double err = 0.0;
        for (Index i = 0; i < 6; ++i)
            for (Index t = 0; t < 30; ++t)
                err += l2_norm(*fit.grid, panel.series[static_cast<std::size_t>(i)].col(t) -
                                              reconstruct_curve(fit, i, t).values);
        CHECK(err <= prev + 1e-9);
        prev = err;
    }
}

TEST_CASE("fit is deterministic") {
    const GridPtr g = make_uniform_grid(41, 0.0, 1.0);
    const FTSPanel panel = random_panel(g, 5, 16, 99);
    const PanelModelFit a = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    const PanelModelFit b = fit_panel_model(panel, 0.9, 0.9, 0.9, LongRunConfig{});
    CHECK(a.m == b.m);
    CHECK(a.n1 == b.n1);
    CHECK(a.n2 == b.n2);
    CHECK((a.gamma - b.gamma).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.xi - b.xi).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.q - b.q).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 0; i < a.zeta.size(); ++i)
        CHECK((a.zeta[i] - b.zeta[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit preconditions") {
    const GridPtr g = make_uniform_grid(11, 0.0, 1.0);
    FTSPanel one = random_panel(g, 1, 8, 1);
    CHECK_THROWS_AS(fit_panel_model(one, 0.9, 0.9, 0.9, LongRunConfig{}),
                    std::invalid_argument);
    FTSPanel short_t = random_panel(g, 3, 3, 1);
    CHECK_THROWS_AS(fit_panel_model(short_t, 0.9, 0.9, 0.9, LongRunConfig{}),
                    std::invalid_argument);
}
