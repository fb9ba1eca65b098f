#ifndef NETPRICING_MONOPOLY_HPP
#define NETPRICING_MONOPOLY_HPP

#include <Eigen/Dense>

#include "netpricing/equilibrium.hpp"
#include "netpricing/network.hpp"

namespace netpricing {

enum class PricingScenario { Uniform, Binary, Differentiated };

const char* to_string(PricingScenario s);

/// A first-stage pricing decision together with the induced second-stage
/// equilibrium and the vendor profit sum_i (p_i - c) x_i.
struct PricingOutcome {
    Eigen::VectorXd prices;
    Investments investments;
    double profit = 0.0;
    PricingScenario scenario = PricingScenario::Uniform;
};

/// Vendor profit (p - c 1)^T x(p) with x(p) the subgame equilibrium.
double profit_at(const ExternalityNetwork& net, const Eigen::VectorXd& prices);

/// The three additive pieces of the optimal differentiated price vector:
/// p = base + markup - discount, where base = (alpha + c 1)/2 is topology
/// invariant, markup charges consumers for the externalities they receive and
/// discount rewards the externalities they exert.
struct PriceDecomposition {
    Eigen::VectorXd base;
    Eigen::VectorXd markup;
    Eigen::VectorXd discount;
};

struct DifferentiatedOutcome {
    PricingOutcome outcome;
    PriceDecomposition parts;
};

/**
 * Profit-maximizing differentiated price vector
 *   p = (alpha + c 1)/2 + (1/2) (G - G^T) (Q - G')^{-1} w',
 * with G' = (G + G^T)/2 and w' = (alpha - c 1)/2; the adjustment equals
 * (1/2)(G - G^T) Q^{-1} B(G', Q^{-1}, w') in Bonacich form. This is the
 * unique stationary point of the profit, and the global maximum whenever
 * Q - G' is positive definite. Throws SingularSystemError when Q - G' or
 * Q - G is singular.
 */
DifferentiatedOutcome optimal_differentiated_prices(const ExternalityNetwork& net);

/// Optimal single price p = (1^T (Q-G)^{-1} (alpha + c 1)) / (2 1^T (Q-G)^{-1} 1),
/// broadcast to all consumers. Throws SingularSystemError on a singular
/// system or a vanishing denominator.
PricingOutcome optimal_uniform_price(const ExternalityNetwork& net);

/// Vendor profits when pricing ignores the network (P0) and when it uses it
/// (P1): P0 = v^T (Q - G)^{-1} v, P1 = v^T (Q - G')^{-1} v, v = (alpha - c 1)/2.
/// Runs regardless of definiteness of Q - G.
struct Profits {
    double p0 = 0.0;
    double p1 = 0.0;
};
Profits profits_p0_p1(const ExternalityNetwork& net);

/// The two formulations of the eigenvalue bound on P0/P1.
enum class KSpectrumVariant { TheoremStatement, ProofForm };

struct BoundForm {
    KSpectrumVariant variant;
    double lower = 0.0;
    double upper = 0.0;
    bool brackets = false;  ///< lower <= P0/P1 <= upper (small fp tolerance)
};

struct ProfitRatioReport {
    double ratio = 0.0;  ///< P0 / P1
    BoundForm theorem_statement;
    BoundForm proof_form;
};

/**
 * Eigenvalue bounds on P0/P1 for positive-definite Q - G, under both
 * formulations: the statement form 1/2 + lambda(K) with
 * K = (R R^{-T} + R^T R^{-1})/4, and the form with the shifted inverse
 * 1/2 + lambda(((2I + R R^{-T} + R^T R^{-1})/4)^{-1}). The spectrum of K is
 * obtained from the symmetric similar matrix C C^T with
 * C = M^{1/2} R^{-1} M^{1/2}, M = (R + R^T)/2, whose eigenvalues equal
 * 1/2 + lambda(K) and are real in (0, 1]. Throws NotPositiveDefiniteError
 * (with the offending eigenvalue) when M is not positive definite.
 */
ProfitRatioReport profit_ratio_bounds(const ExternalityNetwork& net);

} // namespace netpricing

#endif
