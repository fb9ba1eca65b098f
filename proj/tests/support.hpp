#ifndef NETPRICING_TESTS_SUPPORT_HPP
#define NETPRICING_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "netpricing/network.hpp"
#include "netpricing/rng.hpp"

namespace test_support {

/// Random strictly-concave network: row sums of G scaled below 2*beta_i.
inline netpricing::ExternalityNetwork random_net(int n, std::uint64_t seed,
                                                 double density = 0.4,
                                                 double rowscale = 0.8) {
    netpricing::Rng rng(seed);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && rng.u01() < density) G(i, j) = rng.u01();
    Eigen::VectorXd beta(n), alpha(n);
    for (int i = 0; i < n; ++i) {
        beta(i) = rng.uniform(1.0, 3.0);
        alpha(i) = rng.uniform(1.5, 3.0);
        const double cap = rowscale * 2.0 * beta(i);
        const double rs = G.row(i).sum();
        if (rs > cap) G.row(i) *= cap / rs;
    }
    return netpricing::make_network(G, alpha, beta, 0.5);
}

/// Cached-resolvent profit (p - c 1)^T A (alpha - p); A = (Q - G)^{-1}.
struct ProfitEvaluator {
    Eigen::MatrixXd A;
    Eigen::VectorXd alpha;
    double c;

    explicit ProfitEvaluator(const netpricing::ExternalityNetwork& net)
        : A((net.q_matrix() - net.G).partialPivLu().inverse()), alpha(net.alpha), c(net.c) {}

    double operator()(const Eigen::VectorXd& p) const {
        return (p.array() - c).matrix().dot(A * (alpha - p));
    }
};

} // namespace test_support

#endif
