#include "mftsc/simplex.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mftsc {

namespace {

constexpr double kEps = 1e-9;

struct Tableau {
    Matrix t;                // m x (cols+1), last column = rhs
    std::vector<int> basis;  // basic variable per row
    Index m, cols;

    double& rhs(Index i) { return t(i, cols); }

    void pivot(Index row, Index col) {
        t.row(row) /= t(row, col);
        for (Index i = 0; i < m; ++i) {
            if (i == row) continue;
            const double f = t(i, col);
            if (f != 0.0) t.row(i) -= f * t.row(row);
        }
        basis[static_cast<std::size_t>(row)] = static_cast<int>(col);
    }
};

// Minimizes obj (a row of reduced costs over the tableau columns) in place.
// `active` marks columns eligible to enter. Returns iterations used.
int run_phase(Tableau& tb, Eigen::RowVectorXd& obj, double& obj_rhs,
              const std::vector<bool>& active, int max_iter, std::vector<double>* trace) {
    int it = 0;
    int stall = 0;
    double last = obj_rhs;
    const int bland_after = 3 * static_cast<int>(tb.m + tb.cols);
    while (true) {
        // entering column
        Index enter = -1;
        if (stall < bland_after) {
            double best = -kEps;
            for (Index j = 0; j < tb.cols; ++j)
                if (active[static_cast<std::size_t>(j)] && obj(j) < best) {
                    best = obj(j);
                    enter = j;
                }
        } else { // Bland: first eligible index
            for (Index j = 0; j < tb.cols; ++j)
                if (active[static_cast<std::size_t>(j)] && obj(j) < -kEps) {
                    enter = j;
                    break;
                }
        }
        if (enter < 0) return it;

        // ratio test; Bland tie-break on smallest basis index
        Index leave = -1;
        double best_ratio = 0.0;
        for (Index i = 0; i < tb.m; ++i) {
            const double a = tb.t(i, enter);
            if (a > kEps) {
                const double ratio = tb.rhs(i) / a;
                if (leave < 0 || ratio < best_ratio - kEps ||
                    (ratio < best_ratio + kEps &&
                     tb.basis[static_cast<std::size_t>(i)] <
                         tb.basis[static_cast<std::size_t>(leave)])) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0)
            throw std::runtime_error("simplex: unbounded objective after " +
                                     std::to_string(it) + " iterations");

        tb.pivot(leave, enter);
        const double f = obj(enter);
        obj -= f * tb.t.row(leave).head(tb.cols);
        obj_rhs -= f * tb.t(leave, tb.cols);
        if (trace) trace->push_back(obj_rhs);

        ++it;
        if (obj_rhs < last - 1e-12 * (1.0 + std::abs(last))) {
            last = obj_rhs;
            stall = 0;
        } else {
            ++stall;
        }
        if (it >= max_iter)
            throw std::runtime_error("simplex: iteration cap " + std::to_string(max_iter) +
                                     " reached (m=" + std::to_string(tb.m) +
                                     ", n=" + std::to_string(tb.cols) + ")");
    }
}

} // namespace

SimplexResult solve_lp_ge(const Matrix& A, const Vector& b, const Vector& c, int max_iter) {
    const Index m = A.rows();
    const Index n = A.cols();
    if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex: shape mismatch");

    // columns: [x(n) | surplus(m) | artificial(n_art)]
    std::vector<Index> art_rows;
    for (Index i = 0; i < m; ++i)
        if (b(i) > kEps) art_rows.push_back(i);
    const Index n_art = static_cast<Index>(art_rows.size());
    const Index cols = n + m + n_art;
    if (max_iter <= 0) max_iter = 100 * static_cast<int>(m + n) + 1000;

    Tableau tb;
    tb.m = m;
    tb.cols = cols;
    tb.t = Matrix::Zero(m, cols + 1);
    tb.basis.assign(static_cast<std::size_t>(m), -1);

    // rows with b <= 0 are negated so their surplus column is the basis
    std::vector<char> negated(static_cast<std::size_t>(m), 0);
    for (Index i = 0; i < m; ++i) {
        const bool needs_art = b(i) > kEps;
        const double sgn = needs_art ? 1.0 : -1.0;
        negated[static_cast<std::size_t>(i)] = !needs_art;
        tb.t.row(i).head(n) = sgn * A.row(i);
        tb.t(i, n + i) = -sgn; // surplus enters as  A x - s = b
        tb.t(i, cols) = sgn * b(i);
    }
    for (Index k = 0; k < n_art; ++k) {
        const Index i = art_rows[static_cast<std::size_t>(k)];
        tb.t(i, n + m + k) = 1.0;
        tb.basis[static_cast<std::size_t>(i)] = static_cast<int>(n + m + k);
    }
    for (Index i = 0; i < m; ++i)
        if (tb.basis[static_cast<std::size_t>(i)] < 0)
            tb.basis[static_cast<std::size_t>(i)] = static_cast<int>(n + i);

    SimplexResult res;

    // phase 1: minimize sum of artificials
    if (n_art > 0) {
        Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
        double obj_rhs = 0.0;
        for (Index k = 0; k < n_art; ++k) obj(n + m + k) = 1.0;
        for (Index k = 0; k < n_art; ++k) {
            const Index i = art_rows[static_cast<std::size_t>(k)];
            obj -= tb.t.row(i).head(cols);
            obj_rhs -= tb.t(i, cols);
        }
        std::vector<bool> active(static_cast<std::size_t>(cols), true);
        res.iterations += run_phase(tb, obj, obj_rhs, active, max_iter, nullptr);
        if (-obj_rhs > 1e-7)
            throw std::runtime_error("simplex: infeasible (phase-1 residual " +
                                     std::to_string(-obj_rhs) + ")");
        // drive any artificial still basic (at zero) out of the basis
        for (Index i = 0; i < m; ++i) {
            if (tb.basis[static_cast<std::size_t>(i)] < static_cast<int>(n + m)) continue;
            Index enter = -1;
            for (Index j = 0; j < n + m; ++j)
                if (std::abs(tb.t(i, j)) > 1e-7) {
                    enter = j;
                    break;
                }
            if (enter >= 0) tb.pivot(i, enter);
            // else: redundant row, harmless to leave (rhs is zero)
        }
    }

    // phase 2
    {
        Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
        double obj_rhs = 0.0;
        obj.head(n) = c.transpose();
        for (Index i = 0; i < m; ++i) {
            const int bv = tb.basis[static_cast<std::size_t>(i)];
            if (bv >= 0 && bv < static_cast<int>(n) && c(bv) != 0.0) {
                obj -= c(bv) * tb.t.row(i).head(cols);
                obj_rhs -= c(bv) * tb.t(i, cols);
            }
        }
        std::vector<bool> active(static_cast<std::size_t>(cols), true);
        for (Index k = 0; k < n_art; ++k) active[static_cast<std::size_t>(n + m + k)] = false;
        res.objective_trace.push_back(obj_rhs);
        res.iterations += run_phase(tb, obj, obj_rhs, active, max_iter, &res.objective_trace);
        // run_phase records raw obj_rhs values; the objective is -obj_rhs
        for (auto& v : res.objective_trace) v = -v;
        res.objective = -obj_rhs;
    }

    res.x = Vector::Zero(n);
    for (Index i = 0; i < m; ++i) {
        const int bv = tb.basis[static_cast<std::size_t>(i)];
        if (bv >= 0 && bv < static_cast<int>(n)) res.x(bv) = tb.t(i, cols);
    }
    return res;
}

} // namespace mftsc
