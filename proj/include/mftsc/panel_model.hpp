#pragma once

#include "mftsc/fpca.hpp"
#include "mftsc/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mftsc {

/// Two-way fixed-effects decomposition y_it = mu + eta_i + r_t + u_it with
/// sum-to-zero constraints over i and t; exact identities by construction.
struct PanelDecomposition {
    GridFunction mu;
    Matrix eta;            // J x I
    Matrix r;              // J x T
    std::vector<Matrix> u; // I matrices, J x T
};

/// N1 x N2 cross-Gram q_kl = <rho_k, psi_l>.
Matrix cross_basis_matrix(const Grid& grid, const Matrix& rho, const Matrix& psi);

/// [[I, Q], [Q^T, I]], the Gram of the stacked (rho, psi) projection system.
Matrix stacked_cross_gram(const Matrix& q);

struct FitConfig {
    double share_eta = 0.9; // P1
    double share_r = 0.9;   // P2
    double share_u = 0.9;   // P3
    double flat_top_k = 0.5;
    std::optional<Index> max_lag;
    double bandwidth_r = 0.0; // resolved values actually used
    double bandwidth_u = 0.0;
    std::string eta_divisor = "I-1";
};

/// Count overrides for nested-truncation experiments.
struct FitOptions {
    std::optional<Index> force_m;
    std::optional<Index> force_n1;
    std::optional<Index> force_n2;
};

struct PanelModelFit {
    GridPtr grid;
    std::vector<std::string> labels;
    PanelDecomposition decomposition;
    EigenSystem eta_basis; // covariance of eta_i (static FPCA)
    EigenSystem r_basis;   // long-run covariance of r_t
    EigenSystem u_basis;   // pooled long-run covariance of u_it
    Index m = 1;           // retained counts
    Index n1 = 1;
    Index n2 = 1;
    Matrix gamma;              // I x M
    Matrix xi;                 // T x N1 (per-object estimates averaged over i)
    std::vector<Matrix> zeta;  // I matrices, T x N2
    Matrix q;                  // N1 x N2
    FitConfig config;

    Index n_objects() const { return static_cast<Index>(zeta.size()); }
    Index n_times() const { return xi.rows(); }
};

/// The four two-way averages; satisfies all decomposition invariants.
PanelDecomposition decompose_panel(const FTSPanel& panel);

/// Full pipeline: decomposition, eta/r/u covariance bases, component counts
/// from (P1, I), (P2, T), (P3, I*T), and joint score recovery per curve.
PanelModelFit fit_panel_model(const FTSPanel& panel, double p1, double p2, double p3,
                              const LongRunConfig& lr_config, const FitOptions& options = {});

/// Splits a demeaned curve into (xi, zeta) by solving the stacked system
/// [A; B] = [[I, Q], [Q^T, I]] beta with the minimum-norm pseudoinverse.
std::pair<Vector, Vector> joint_score_projection(const GridFunction& demeaned,
                                                 const EigenSystem& r_basis, Index n1,
                                                 const EigenSystem& u_basis, Index n2,
                                                 const Matrix& q);

/// mu + sum_m gamma_im phi_m + sum_k xi_tk rho_k + sum_l zeta_itl psi_l.
GridFunction reconstruct_curve(const PanelModelFit& fit, Index i, Index t);

} // namespace mftsc
