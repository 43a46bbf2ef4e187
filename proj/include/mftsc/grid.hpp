#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

namespace mftsc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Uniform evaluation grid over a continuum (ages, or a normalized [0,1]
/// interval). Carries precomputed trapezoidal quadrature weights; every
/// inner product in the library integrates against these.
class Grid {
public:
    /// Validates strictly increasing, uniformly spaced points.
    explicit Grid(Vector points);

    const Vector& points() const { return points_; }
    double spacing() const { return spacing_; }
    Index size() const { return points_.size(); }
    double a() const { return points_(0); }
    double b() const { return points_(points_.size() - 1); }

    /// Trapezoid weights: dx/2 at the ends, dx inside.
    const Vector& quad_weights() const { return weights_; }

private:
    Vector points_;
    double spacing_;
    Vector weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// n_points >= 2 equally spaced points on [a, b], a < b.
GridPtr make_uniform_grid(Index n_points, double a, double b);

/// Grid built from externally supplied points (e.g. integer ages).
GridPtr make_grid(Vector points);

bool same_grid(const Grid& x, const Grid& y);

/// A function sampled on a grid; all values finite.
struct GridFunction {
    GridPtr grid;
    Vector values;

    GridFunction() = default;
    GridFunction(GridPtr g, Vector v);
};

/// Trapezoidal approximation of the L2 inner product int f g dx.
double inner_product(const GridFunction& f, const GridFunction& g);
double l2_distance(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);

// Matrix-level kernels (columns of a J x T matrix are curves on `grid`).
double inner_product(const Grid& grid, const Vector& f, const Vector& g);
double l2_norm(const Grid& grid, const Vector& f);

/// Panel of I labeled functional time series sharing one grid; series[i] is
/// J x T with column t holding the curve observed at time t.
struct FTSPanel {
    GridPtr grid;
    std::vector<std::string> labels;
    std::vector<Matrix> series;

    Index n_objects() const { return static_cast<Index>(series.size()); }
    Index n_times() const { return series.empty() ? 0 : series.front().cols(); }

    /// Checks the shared-grid / equal-T / finiteness invariants.
    void validate() const;
};

} // namespace mftsc
