#include "mftsc/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace mftsc {

Grid::Grid(Vector points) : points_(std::move(points)) {
    const Index n = points_.size();
    if (n < 2) throw std::invalid_argument("grid needs at least 2 points");
    spacing_ = (points_(n - 1) - points_(0)) / static_cast<double>(n - 1);
    if (!(spacing_ > 0.0)) throw std::invalid_argument("grid points must be increasing");
    for (Index j = 0; j + 1 < n; ++j) {
        const double step = points_(j + 1) - points_(j);
        if (!(step > 0.0)) throw std::invalid_argument("grid points must be strictly increasing");
        if (std::abs(step - spacing_) >= 1e-12 * std::max(1.0, std::abs(spacing_)) &&
            std::abs(step - spacing_) >= 1e-12)
            throw std::invalid_argument("grid points must be uniformly spaced");
    }
    weights_ = Vector::Constant(n, spacing_);
    weights_(0) = 0.5 * spacing_;
    weights_(n - 1) = 0.5 * spacing_;
}

GridPtr make_uniform_grid(Index n_points, double a, double b) {
    if (n_points < 2) throw std::invalid_argument("make_uniform_grid: n_points must be >= 2");
    if (!(a < b)) throw std::invalid_argument("make_uniform_grid: requires a < b");
    Vector pts(n_points);
    const double dx = (b - a) / static_cast<double>(n_points - 1);
    for (Index j = 0; j < n_points; ++j) pts(j) = a + static_cast<double>(j) * dx;
    pts(n_points - 1) = b;
    return std::make_shared<Grid>(std::move(pts));
}

GridPtr make_grid(Vector points) { return std::make_shared<Grid>(std::move(points)); }

bool same_grid(const Grid& x, const Grid& y) {
    if (&x == &y) return true;
    if (x.size() != y.size()) return false;
    const double tol = 1e-12 * std::max(1.0, std::abs(x.b() - x.a()));
    return std::abs(x.a() - y.a()) < tol && std::abs(x.b() - y.b()) < tol &&
           std::abs(x.spacing() - y.spacing()) < tol;
}

GridFunction::GridFunction(GridPtr g, Vector v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("GridFunction: null grid");
    if (values.size() != grid->size())
        throw std::invalid_argument("GridFunction: value/grid length mismatch");
    if (!values.allFinite()) throw std::invalid_argument("GridFunction: non-finite values");
}

static void require_same_grid(const GridFunction& f, const GridFunction& g) {
    if (!f.grid || !g.grid || !same_grid(*f.grid, *g.grid))
        throw std::invalid_argument("grid mismatch between functions");
}

double inner_product(const Grid& grid, const Vector& f, const Vector& g) {
    return f.cwiseProduct(g).dot(grid.quad_weights());
}

double l2_norm(const Grid& grid, const Vector& f) {
    return std::sqrt(std::max(0.0, inner_product(grid, f, f)));
}

double inner_product(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    return inner_product(*f.grid, f.values, g.values);
}

double l2_distance(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    return l2_norm(*f.grid, f.values - g.values);
}

double l2_norm(const GridFunction& f) { return l2_norm(*f.grid, f.values); }

void FTSPanel::validate() const {
    if (!grid) throw std::invalid_argument("panel has no grid");
    if (series.empty()) throw std::invalid_argument("panel has no series");
    if (labels.size() != series.size())
        throw std::invalid_argument("panel label/series count mismatch");
    const Index t = series.front().cols();
    for (const auto& s : series) {
        if (s.rows() != grid->size()) throw std::invalid_argument("panel series off the grid");
        if (s.cols() != t) throw std::invalid_argument("ragged panel: unequal series lengths");
        if (!s.allFinite()) throw std::invalid_argument("panel contains non-finite values");
    }
}

} // namespace mftsc
