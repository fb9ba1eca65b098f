#include "netpricing/oligopoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "netpricing/binary.hpp"
#include "netpricing/errors.hpp"
#include "netpricing/rng.hpp"

namespace netpricing {

std::vector<int> partition_consumers(int n, int n_svs, PartitionScheme scheme,
                                     std::uint64_t seed) {
    if (n_svs != 2) throw std::invalid_argument("the market model is a duopoly: n_svs must be 2");
    if (n < n_svs) throw std::invalid_argument("fewer consumers than vendors");
    std::vector<int> assignment(n, 0);
    if (scheme == PartitionScheme::Alternating) {
        for (int i = 0; i < n; ++i) assignment[i] = i % n_svs;
        return assignment;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0x9a47));
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int k = 0; k < n; ++k) assignment[order[k]] = (k < (n + 1) / 2) ? 0 : 1;
    return assignment;
}

namespace {

struct VendorBlock {
    std::vector<int> clients;
    std::vector<int> rivals;
    Eigen::MatrixXd A_ss;                      // own block of the vendor's resolvent model
    Eigen::MatrixXd A_sr;                      // own rows, rival columns (zero when myopic)
    Eigen::PartialPivLU<Eigen::MatrixXd> foc;  // A_ss + A_ss^T
    double ones_A_ones = 0.0;                  // 1^T A_ss 1
};

struct MarketContext {
    const ExternalityNetwork& net;
    const DuopolyParams& params;
    Eigen::MatrixXd A;  // full-network resolvent (Q - G)^{-1}
    VendorBlock blocks[2];

    MarketContext(const ExternalityNetwork& network, const std::vector<int>& assignment,
                  const DuopolyParams& p)
        : net(network), params(p) {
        const int n = net.n();
        if (static_cast<int>(assignment.size()) != n)
            throw std::invalid_argument("assignment length mismatch");
        for (int v : assignment)
            if (v != 0 && v != 1) throw std::invalid_argument("assignment must map to vendor 0/1");

        Eigen::MatrixXd system = net.q_matrix() - net.G;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
        if (!(lu.rcond() > 1e-14)) throw SingularSystemError("Q - G is numerically singular");
        A = lu.inverse();

        for (int sv = 0; sv < 2; ++sv) {
            VendorBlock& blk = blocks[sv];
            for (int i = 0; i < n; ++i)
                (assignment[i] == sv ? blk.clients : blk.rivals).push_back(i);
            if (blk.clients.empty())
                throw std::invalid_argument("vendor " + std::to_string(sv) + " has no clients");
            const int ns = static_cast<int>(blk.clients.size());
            const int nr = static_cast<int>(blk.rivals.size());

            if (params.full_information) {
                blk.A_ss.resize(ns, ns);
                blk.A_sr.resize(ns, nr);
                for (int a = 0; a < ns; ++a) {
                    for (int b = 0; b < ns; ++b)
                        blk.A_ss(a, b) = A(blk.clients[a], blk.clients[b]);
                    for (int b = 0; b < nr; ++b) blk.A_sr(a, b) = A(blk.clients[a], blk.rivals[b]);
                }
            } else {
                // Myopic mode: the vendor prices as if its clients formed the
                // whole market, using only its own sub-block of G.
                Eigen::MatrixXd sub(ns, ns);
                Eigen::VectorXd qdiag(ns);
                for (int a = 0; a < ns; ++a) {
                    qdiag(a) = 2.0 * net.beta(blk.clients[a]);
                    for (int b = 0; b < ns; ++b) sub(a, b) = net.G(blk.clients[a], blk.clients[b]);
                }
                Eigen::MatrixXd local = qdiag.asDiagonal().toDenseMatrix() - sub;
                Eigen::PartialPivLU<Eigen::MatrixXd> llu(local);
                if (!(llu.rcond() > 1e-14))
                    throw SingularSystemError("vendor sub-block system is singular");
                blk.A_ss = llu.inverse();
                blk.A_sr = Eigen::MatrixXd::Zero(ns, nr);
            }
            blk.foc.compute(blk.A_ss + blk.A_ss.transpose());
            if (!(blk.foc.rcond() > 1e-14))
                throw SingularSystemError("vendor first-order system is singular");
            blk.ones_A_ones = blk.A_ss.sum();
        }
    }
};

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx) {
    Eigen::VectorXd out(static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<int>(k)) = full[idx[k]];
    return out;
}

// Exhaustive sign search over a local quadratic form, lexicographic tie-break.
Eigen::VectorXi enumerate_signs(const QuadraticForm& qf) {
    const int n = qf.n();
    Eigen::VectorXi best(n), y(n);
    double best_value = -std::numeric_limits<double>::infinity();
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t k = 0; k < total; ++k) {
        for (int i = 0; i < n; ++i) y(i) = ((k >> (n - 1 - i)) & 1ULL) ? 1 : -1;
        const double value = qf.value(y);
        if (value > best_value) {
            best_value = value;
            best = y;
        }
    }
    return best;
}

// Best response of one vendor given the rival's current prices; returns the
// full vector with the vendor's entries replaced.
Eigen::VectorXd best_response(const MarketContext& ctx, const Eigen::VectorXd& prices, int sv,
                              std::uint64_t stream) {
    const VendorBlock& blk = ctx.blocks[sv];
    const ExternalityNetwork& net = ctx.net;
    const Eigen::VectorXd alpha_s = gather(net.alpha, blk.clients);
    const int ns = static_cast<int>(blk.clients.size());

    // Induced demand offset from rival clients: b = A_sr (alpha - p)_rival.
    const Eigen::VectorXd rival_gap = gather(net.alpha, blk.rivals) - gather(prices, blk.rivals);
    const Eigen::VectorXd b = blk.A_sr * rival_gap;

    Eigen::VectorXd p_s;
    switch (ctx.params.scenario) {
        case PricingScenario::Differentiated: {
            const Eigen::VectorXd rhs =
                blk.A_ss.transpose() * (alpha_s.array() - net.c).matrix() - b;
            const Eigen::VectorXd u = blk.foc.solve(rhs);
            p_s = alpha_s - u;
            break;
        }
        case PricingScenario::Uniform: {
            const double q1 = blk.ones_A_ones;
            if (std::abs(q1) < 1e-12)
                throw SingularSystemError("uniform best response: 1^T A_ss 1 vanishes");
            const double q0 = (blk.A_ss * alpha_s).sum() + b.sum();
            p_s = Eigen::VectorXd::Constant(ns, (q0 + net.c * q1) / (2.0 * q1));
            break;
        }
        case PricingScenario::Binary: {
            // Two price levels spread around the vendor's uniform best response.
            const double q1 = blk.ones_A_ones;
            if (std::abs(q1) < 1e-12)
                throw SingularSystemError("binary best response: 1^T A_ss 1 vanishes");
            const double q0 = (blk.A_ss * alpha_s).sum() + b.sum();
            const double p_mid = (q0 + net.c * q1) / (2.0 * q1);
            const double delta = ctx.params.binary_deviation * p_mid;
            if (!(delta > 0.0)) {
                p_s = Eigen::VectorXd::Constant(ns, p_mid);
                break;
            }
            const double cm = p_mid - net.c;
            const Eigen::VectorXd as = (alpha_s.array() - p_mid).matrix();
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(ns);

            QuadraticForm qf;
            Eigen::MatrixXd sym = 0.5 * (blk.A_ss + blk.A_ss.transpose());
            qf.Qhat = -delta * delta * sym;
            qf.Qhat.diagonal().setZero();
            qf.d = 0.5 * delta *
                   ((blk.A_ss * as - cm * (blk.A_ss.transpose() * ones)) + b);
            qf.z = cm * ones.dot(blk.A_ss * as) - delta * delta * blk.A_ss.trace() +
                   cm * b.sum();

            Eigen::VectorXi y;
            if (ns <= 18) {
                y = enumerate_signs(qf);
            } else {
                const SdpSolution sdp =
                    solve_sdp_relaxation(qf, 1e-8, derive_seed(stream, 0x5d));
                y = round_hyperplane(sdp, qf, ctx.params.rounding_trials,
                                     derive_seed(stream, 0x17))
                        .y_best;
            }
            p_s = (delta * y.cast<double>().array() + p_mid).matrix();
            break;
        }
    }

    Eigen::VectorXd out = prices;
    for (int k = 0; k < ns; ++k) out[blk.clients[k]] = p_s(k);
    return out;
}

} // namespace

Eigen::VectorXd sv_best_response(const ExternalityNetwork& net,
                                 const std::vector<int>& assignment,
                                 const Eigen::VectorXd& prices, int sv,
                                 const DuopolyParams& params) {
    if (sv != 0 && sv != 1) throw std::invalid_argument("sv must be 0 or 1");
    if (prices.size() != net.n()) throw std::invalid_argument("price vector length mismatch");
    MarketContext ctx(net, assignment, params);
    return best_response(ctx, prices, sv, derive_seed(params.seed, 0xb33, sv));
}

MarketRun run_market(const ExternalityNetwork& net, const std::vector<int>& assignment,
                     const DuopolyParams& params) {
    if (!(params.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    MarketContext ctx(net, assignment, params);

    // Externality-blind benchmark: both vendors at the topology-invariant price.
    const Eigen::VectorXd p_blind = 0.5 * (net.alpha.array() + net.c).matrix();
    const Eigen::VectorXd x_blind = ctx.A * (net.alpha - p_blind);

    MarketRun run;
    for (int sv = 0; sv < 2; ++sv) {
        double acc = 0.0;
        for (int i : ctx.blocks[sv].clients) acc += (p_blind(i) - net.c) * x_blind(i);
        run.baseline_profits(sv) = acc;
    }

    Eigen::VectorXd prices = p_blind;
    std::vector<double> gaps;
    constexpr int kOscillationWindow = 6;

    for (int round = 1; round <= params.max_rounds; ++round) {
        Eigen::VectorXd next;
        if (params.sequential) {
            next = prices;
            for (int sv = 0; sv < 2; ++sv)
                next = best_response(ctx, next, sv, derive_seed(params.seed, round, sv));
        } else {
            const Eigen::VectorXd r0 =
                best_response(ctx, prices, 0, derive_seed(params.seed, round, 0));
            next = best_response(ctx, prices, 1, derive_seed(params.seed, round, 1));
            for (int i : ctx.blocks[0].clients) next[i] = r0[i];
        }

        MarketState state;
        state.round = round;
        state.prices = next;
        state.investments.x = ctx.A * (net.alpha - next);
        for (int sv = 0; sv < 2; ++sv) {
            double acc = 0.0;
            for (int i : ctx.blocks[sv].clients) acc += (next(i) - net.c) * state.investments.x(i);
            state.profits(sv) = acc;
            state.profit_ratios(sv) =
                state.profits(sv) != 0.0 ? run.baseline_profits(sv) / state.profits(sv) : 0.0;
        }

        const double gap = (next - prices).cwiseAbs().maxCoeff();
        gaps.push_back(gap);
        run.trajectory.push_back(std::move(state));
        run.final_gap = gap;
        prices = next;

        if (gap < params.tol) {
            run.converged = true;
            break;
        }
        if (static_cast<int>(gaps.size()) >= kOscillationWindow) {
            bool non_decreasing = true;
            for (std::size_t k = gaps.size() - kOscillationWindow + 1; k < gaps.size(); ++k)
                if (gaps[k] < gaps[k - 1]) {
                    non_decreasing = false;
                    break;
                }
            if (non_decreasing) {
                run.oscillating = true;
                break;
            }
        }
    }
    return run;
}

} // namespace netpricing
