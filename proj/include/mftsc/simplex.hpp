#pragma once

#include "mftsc/grid.hpp"

#include <vector>

namespace mftsc {

struct SimplexResult {
    Vector x;
    double objective = 0.0;
    int iterations = 0;
    /// Phase-2 objective after each pivot; nonincreasing.
    std::vector<double> objective_trace;
};

/// Solves  min c'x  s.t.  A x >= b,  x >= 0  by two-phase dense simplex
/// (Dantzig pricing, Bland fallback on stall). Throws std::runtime_error
/// with iteration diagnostics on infeasibility, unboundedness, or when the
/// iteration cap is hit.
SimplexResult solve_lp_ge(const Matrix& A, const Vector& b, const Vector& c, int max_iter = 0);

} // namespace mftsc
