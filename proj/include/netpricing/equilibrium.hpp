#ifndef NETPRICING_EQUILIBRIUM_HPP
#define NETPRICING_EQUILIBRIUM_HPP

#include <Eigen/Dense>

#include "netpricing/network.hpp"

namespace netpricing {

/// Consumer investment profile at (or on the way to) equilibrium.
struct Investments {
    Eigen::VectorXd x;
    bool clamped = false;  ///< iteration hit the x >= 0 constraint at least once
    int iterations = 0;    ///< 0 for closed-form solves

    bool interior() const { return (x.array() > 0.0).all(); }
};

struct SpectralCheck {
    double radius = 0.0;  ///< spectral radius of Q^{-1} G
    bool invertible = false;
};

/// Spectral radius of Q^{-1}G and invertibility of I - Q^{-1}G, the gate for
/// the closed-form subgame solve. Throws SingularSystemError when some
/// beta_i == 0 makes Q singular.
SpectralCheck spectral_radius_check(const ExternalityNetwork& net);

/// Spectral radius of a general square matrix (dense eigensolve).
double spectral_radius(const Eigen::MatrixXd& m);

/// Weighted Bonacich centrality (I - G D)^{-1} w, computed by linear solve.
/// D is passed as its diagonal. Throws SpectralConditionError (carrying the
/// radius) when rho(G D) >= 1.
Eigen::VectorXd bonacich(const Eigen::MatrixXd& G, const Eigen::VectorXd& d_diag,
                         const Eigen::VectorXd& w);

/// Unique subgame Nash equilibrium x = (Q - G)^{-1} (alpha - p) for an
/// arbitrary price vector. Throws SingularSystemError when Q - G is singular.
Investments ne_closed_form(const ExternalityNetwork& net, const Eigen::VectorXd& prices);

/**
 * Synchronous best-response iteration
 *   x_i <- max(0, (alpha_i - p_i + sum_j G(i,j) x_j) / (2 beta_i)),
 * stopping when the max-norm step falls below tol. Converges from any start
 * when rho(Q^{-1}G) < 1; negative intermediate values are clamped at zero and
 * flagged. Throws IterationLimitError (carrying the last iterate and
 * residual) when max_iter is exhausted.
 */
Investments ne_best_response_iteration(const ExternalityNetwork& net,
                                       const Eigen::VectorXd& prices, const Eigen::VectorXd& x0,
                                       double tol = 1e-10, int max_iter = 10000);

/// Max-norm residual of the interior first-order conditions
/// alpha - p - 2 beta .* x + G x at a candidate equilibrium.
double best_response_residual(const ExternalityNetwork& net, const Eigen::VectorXd& prices,
                              const Eigen::VectorXd& x);

} // namespace netpricing

#endif
