#include "netpricing/equilibrium.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "netpricing/errors.hpp"

namespace netpricing {

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

SpectralCheck spectral_radius_check(const ExternalityNetwork& net) {
    const int n = net.n();
    for (int i = 0; i < n; ++i)
        if (net.beta(i) == 0.0)
            throw SingularSystemError("Q is singular: beta_" + std::to_string(i) + " is zero");
    Eigen::MatrixXd qinv_g = (0.5 / net.beta.array()).matrix().asDiagonal() * net.G;
    SpectralCheck out;
    out.radius = spectral_radius(qinv_g);
    if (out.radius < 1.0) {
        out.invertible = true;  // rho < 1 forces every eigenvalue of I - Q^{-1}G off zero
    } else {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - qinv_g;
        out.invertible = Eigen::FullPivLU<Eigen::MatrixXd>(m).isInvertible();
    }
    return out;
}

Eigen::VectorXd bonacich(const Eigen::MatrixXd& G, const Eigen::VectorXd& d_diag,
                         const Eigen::VectorXd& w) {
    const int n = static_cast<int>(G.rows());
    if (G.cols() != n || d_diag.size() != n || w.size() != n)
        throw std::invalid_argument("bonacich: dimension mismatch");
    Eigen::MatrixXd gd = G * d_diag.asDiagonal();
    const double radius = spectral_radius(gd);
    if (!(radius < 1.0))
        throw SpectralConditionError("bonacich: rho(GD) = " + std::to_string(radius) + " >= 1",
                                     radius);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - gd;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(system).solve(w);
}

namespace {

// Cheap sufficient condition for rho(Q^{-1}G) < 1: every row of Q^{-1}G sums
// below one. Exactly the strict-concavity diagnostic, so generated networks
// take this path and skip the dense eigensolve.
bool row_sum_contraction(const ExternalityNetwork& net) {
    for (int i = 0; i < net.n(); ++i)
        if (!(net.G.row(i).sum() < 2.0 * net.beta(i))) return false;
    return true;
}

} // namespace

Investments ne_closed_form(const ExternalityNetwork& net, const Eigen::VectorXd& prices) {
    const int n = net.n();
    if (prices.size() != n) throw std::invalid_argument("price vector length mismatch");
    if (!row_sum_contraction(net)) {
        SpectralCheck check = spectral_radius_check(net);
        if (!check.invertible)
            throw SingularSystemError("subgame system Q - G is singular (rho = " +
                                      std::to_string(check.radius) + ")");
    }
    Eigen::MatrixXd system = net.q_matrix() - net.G;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    if (!(lu.rcond() > 1e-14))
        throw SingularSystemError("subgame system Q - G is numerically singular");
    Investments out;
    out.x = lu.solve(net.alpha - prices);
    if (!out.x.allFinite()) throw SingularSystemError("subgame solve produced non-finite values");
    return out;
}

Investments ne_best_response_iteration(const ExternalityNetwork& net,
                                       const Eigen::VectorXd& prices, const Eigen::VectorXd& x0,
                                       double tol, int max_iter) {
    const int n = net.n();
    if (prices.size() != n || x0.size() != n)
        throw std::invalid_argument("price/start vector length mismatch");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");

    Investments out;
    out.x = x0.cwiseMax(0.0);
    Eigen::VectorXd next(n);
    for (int it = 1; it <= max_iter; ++it) {
        next = (net.alpha - prices + net.G * out.x).array() / (2.0 * net.beta.array());
        if ((next.array() < 0.0).any()) {
            out.clamped = true;
            next = next.cwiseMax(0.0);
        }
        const double step = (next - out.x).cwiseAbs().maxCoeff();
        out.x.swap(next);
        out.iterations = it;
        if (step < tol) return out;
    }
    const double residual = (out.x - ((net.alpha - prices + net.G * out.x).array() /
                                      (2.0 * net.beta.array()))
                                         .matrix()
                                         .cwiseMax(0.0))
                                .cwiseAbs()
                                .maxCoeff();
    throw IterationLimitError("best-response iteration did not converge in " +
                                  std::to_string(max_iter) + " steps (residual " +
                                  std::to_string(residual) + ")",
                              out.x, residual);
}

double best_response_residual(const ExternalityNetwork& net, const Eigen::VectorXd& prices,
                              const Eigen::VectorXd& x) {
    Eigen::VectorXd grad =
        net.alpha - prices - (2.0 * net.beta.array() * x.array()).matrix() + net.G * x;
    return grad.cwiseAbs().maxCoeff();
}

} // namespace netpricing
