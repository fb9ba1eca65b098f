#ifndef NETPRICING_BINARY_HPP
#define NETPRICING_BINARY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "netpricing/monopoly.hpp"
#include "netpricing/network.hpp"

namespace netpricing {

/**
 * Two-price problem: every consumer pays either the regular price p_reg or
 * the discounted price p_dsc. With p_mid = (p_reg + p_dsc)/2 and
 * delta = p_reg - p_mid, a price assignment is p = delta * y + p_mid * 1 for
 * a sign vector y, and the vendor maximizes
 *   (delta y + c' 1)^T A (alpha' - delta y),  A = (Q - G)^{-1},
 * over y in {-1, +1}^n, where alpha' = alpha - p_mid 1 and c' = p_mid - c.
 */
struct BinaryPricingProblem {
    ExternalityNetwork net;
    double p_reg = 0.0;
    double p_dsc = 0.0;
    bool margin_warning = false;  ///< c' < delta; reported, not rejected

    BinaryPricingProblem(ExternalityNetwork network, double regular, double discounted);

    double p_mid() const { return 0.5 * (p_reg + p_dsc); }
    double delta() const { return p_reg - p_mid(); }
    double cost_margin() const { return p_mid() - net.c; }  // c'
    Eigen::VectorXd alpha_shifted() const { return (net.alpha.array() - p_mid()).matrix(); }

    /// Decoded prices for a sign vector (+1 regular, -1 discounted).
    Eigen::VectorXd decode_prices(const Eigen::VectorXi& y) const;

    /// Direct profit evaluation at a sign assignment (independent of the
    /// quadratic reformulation; used as the exact oracle).
    double objective(const Eigen::VectorXi& y) const;
};

/// The profit expressed as y^T Qhat y + 2 d^T y + z over sign vectors, with
/// Qhat symmetric and zero-diagonal (the diagonal is folded into z via
/// y_i^2 = 1).
struct QuadraticForm {
    Eigen::MatrixXd Qhat;
    Eigen::VectorXd d;
    double z = 0.0;

    int n() const { return static_cast<int>(d.size()); }

    double value(const Eigen::VectorXi& y) const;

    /// Homogenized (n+1) x (n+1) block matrix [[Qhat, d], [d^T, 0]].
    Eigen::MatrixXd homogenized() const;

    /// sum_ij |Q'_ij| - z, the shift that makes the 0.878 guarantee
    /// unconditional. Nonnegative offset of every objective value.
    double guarantee_shift() const;
};

/// Expands the two-price objective into sign-vector space:
/// Qhat = -delta^2 (sym(A) - diag), d = (delta/2)(A alpha' - c' A^T 1),
/// z = c' 1^T A alpha' - delta^2 trace(A).
QuadraticForm reformulate(const BinaryPricingProblem& prob);

struct BruteForceResult {
    Eigen::VectorXi y_star;
    double w_opt = 0.0;
};

/// Exhaustive optimum over all 2^n sign vectors, evaluating the direct
/// objective. Ties break toward the lexicographically smallest vector
/// (-1 before +1, leftmost coordinate most significant). Throws
/// std::invalid_argument when n exceeds the cap.
BruteForceResult brute_force_opt(const BinaryPricingProblem& prob, int max_n = 22);

/// Unit-sphere embedding of the relaxed problem plus solver diagnostics.
struct SdpSolution {
    Eigen::MatrixXd V;          ///< (n+1) x (n+1); column i is the embedding of y_i
    double sdp_objective = 0.0; ///< sum_ij Q'_ij V_i . V_j + z
    double max_norm_deviation = 0.0;
    double last_objective_change = 0.0;
    int sweeps = 0;
};

/**
 * Maximizes sum_ij Q'_ij nu_i . nu_j + z over unit vectors nu_i, the
 * semidefinite relaxation of the sign problem (Y = V^T V is feasible for the
 * SDP: unit diagonal, PSD). Solved by block-coordinate ascent on a low-rank
 * factorization with random restarts; the rank exceeds the exactness
 * threshold sqrt(2(n+1)). Throws IterationLimitError when the objective has
 * not stabilized within the sweep budget.
 */
SdpSolution solve_sdp_relaxation(const QuadraticForm& qf, double tol = 1e-9,
                                 std::uint64_t seed = 0x5d7e19af);

struct RoundingResult {
    Eigen::VectorXi y_best;
    double w_alg = 0.0;   ///< best rounded objective across trials
    double w_mean = 0.0;  ///< empirical mean of per-trial objectives
    double w_stderr = 0.0;
};

/// Goemans-Williamson rounding: samples Gaussian hyperplane normals, signs
/// each embedding (ties at exactly zero resolve to +1), and de-homogenizes by
/// flipping all signs when the auxiliary coordinate rounds to -1.
RoundingResult round_hyperplane(const SdpSolution& sdp, const QuadraticForm& qf, int trials,
                                std::uint64_t rng_seed);

/// Additive constant of the approximation guarantee
/// E[W_alg] + r >= 0.878 (W_OPT + r):
/// r = delta^2 1^T A 1 + delta 1^T |A alpha' - c' A^T 1| - c' 1^T A alpha'
///     - 2 delta^2 trace(A), with |.| elementwise.
double compute_r(const BinaryPricingProblem& prob);

struct BinaryPipelineResult {
    PricingOutcome outcome;
    Eigen::VectorXi y;  ///< +1 regular, -1 discounted
    double w_alg = 0.0;
    double w_mean = 0.0;
    double w_stderr = 0.0;
    double r_constant = 0.0;      ///< closed-form constant from compute_r
    double guarantee_shift = 0.0; ///< sum|Q'_ij| - z; keeps shifted objectives nonnegative
    std::optional<double> w_opt;  ///< exact optimum when n <= brute_cap
    /// (w_alg + shift) / (w_opt + shift), measured against the guarantee shift
    std::optional<double> achieved_ratio;
};

/// Full approximation pipeline: reformulate, relax, round, decode prices,
/// solve the induced subgame. Attaches the exhaustive optimum and the
/// achieved ratio when the instance is small enough to enumerate.
BinaryPipelineResult binary_pricing_pipeline(const BinaryPricingProblem& prob, int trials = 500,
                                             std::uint64_t seed = 0, int brute_cap = 18);

} // namespace netpricing

#endif
