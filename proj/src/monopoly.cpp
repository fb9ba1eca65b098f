#include "netpricing/monopoly.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "netpricing/errors.hpp"

namespace netpricing {

const char* to_string(PricingScenario s) {
    switch (s) {
        case PricingScenario::Uniform: return "uniform";
        case PricingScenario::Binary: return "binary";
        case PricingScenario::Differentiated: return "differentiated";
    }
    return "?";
}

double profit_at(const ExternalityNetwork& net, const Eigen::VectorXd& prices) {
    Investments inv = ne_closed_form(net, prices);
    return (prices.array() - net.c).matrix().dot(inv.x);
}

namespace {

Eigen::PartialPivLU<Eigen::MatrixXd> checked_lu(const Eigen::MatrixXd& m, const char* label) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > 1e-14))
        throw SingularSystemError(std::string(label) + " is numerically singular");
    return lu;
}

} // namespace

DifferentiatedOutcome optimal_differentiated_prices(const ExternalityNetwork& net) {
    const Eigen::MatrixXd Q = net.q_matrix();
    const Eigen::MatrixXd Gsym = 0.5 * (net.G + net.G.transpose());
    const Eigen::VectorXd w = 0.5 * (net.alpha.array() - net.c).matrix();

    auto lu = checked_lu(Q - Gsym, "Q - G'");
    const Eigen::VectorXd u = lu.solve(w);  // (Q - G')^{-1} w', also the induced investments

    DifferentiatedOutcome out;
    out.parts.base = 0.5 * (net.alpha.array() + net.c).matrix();
    out.parts.markup = 0.5 * (net.G * u);
    out.parts.discount = 0.5 * (net.G.transpose() * u);
    out.outcome.prices = out.parts.base + out.parts.markup - out.parts.discount;
    out.outcome.investments = ne_closed_form(net, out.outcome.prices);
    out.outcome.profit =
        (out.outcome.prices.array() - net.c).matrix().dot(out.outcome.investments.x);
    out.outcome.scenario = PricingScenario::Differentiated;
    return out;
}

PricingOutcome optimal_uniform_price(const ExternalityNetwork& net) {
    const int n = net.n();
    const Eigen::MatrixXd system = net.q_matrix() - net.G;
    auto lu = checked_lu(system, "Q - G");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd a_plus = (net.alpha.array() + net.c).matrix();
    const double numerator = ones.dot(lu.solve(a_plus));
    const double denominator = ones.dot(lu.solve(ones));
    if (std::abs(denominator) < 1e-12)
        throw SingularSystemError("uniform price denominator 1^T (Q-G)^{-1} 1 vanishes");
    const double p = 0.5 * numerator / denominator;

    PricingOutcome out;
    out.prices = Eigen::VectorXd::Constant(n, p);
    out.investments = ne_closed_form(net, out.prices);
    out.profit = (out.prices.array() - net.c).matrix().dot(out.investments.x);
    out.scenario = PricingScenario::Uniform;
    return out;
}

Profits profits_p0_p1(const ExternalityNetwork& net) {
    const Eigen::MatrixXd Q = net.q_matrix();
    const Eigen::MatrixXd R = Q - net.G;
    const Eigen::MatrixXd M = 0.5 * (R + R.transpose());  // = Q - G'
    const Eigen::VectorXd v = 0.5 * (net.alpha.array() - net.c).matrix();
    Profits out;
    out.p0 = v.dot(checked_lu(R, "Q - G").solve(v));
    out.p1 = v.dot(checked_lu(M, "Q - G'").solve(v));
    return out;
}

ProfitRatioReport profit_ratio_bounds(const ExternalityNetwork& net) {
    const Eigen::MatrixXd Q = net.q_matrix();
    const Eigen::MatrixXd R = Q - net.G;
    const Eigen::MatrixXd M = 0.5 * (R + R.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esM(M);
    const double min_eig = esM.eigenvalues().minCoeff();
    if (!(min_eig > 1e-10))
        throw NotPositiveDefiniteError(
            "Q - G is not positive definite (min symmetric-part eigenvalue " +
                std::to_string(min_eig) + ")",
            min_eig);

    const Eigen::MatrixXd Mhalf = esM.operatorSqrt();
    const Eigen::MatrixXd X = checked_lu(R, "Q - G").solve(Mhalf);
    const Eigen::MatrixXd C = Mhalf * X;  // M^{1/2} R^{-1} M^{1/2}
    Eigen::MatrixXd T = C * C.transpose();
    T = 0.5 * (T + T.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esT(T);
    const double t_min = esT.eigenvalues().minCoeff();
    const double t_max = esT.eigenvalues().maxCoeff();

    ProfitRatioReport out;
    const Profits pr = profits_p0_p1(net);
    out.ratio = pr.p0 / pr.p1;

    // eig(C C^T) = 1/2 + eig(K), so the statement bounds are the extremes directly.
    out.theorem_statement.variant = KSpectrumVariant::TheoremStatement;
    out.theorem_statement.lower = t_min;
    out.theorem_statement.upper = t_max;

    out.proof_form.variant = KSpectrumVariant::ProofForm;
    out.proof_form.lower = 0.5 + 1.0 / t_max;
    out.proof_form.upper = 0.5 + 1.0 / t_min;

    const double slack = 1e-9 * (1.0 + std::abs(out.ratio));
    for (BoundForm* f : {&out.theorem_statement, &out.proof_form})
        f->brackets = (f->lower - slack <= out.ratio) && (out.ratio <= f->upper + slack);
    return out;
}

} // namespace netpricing
