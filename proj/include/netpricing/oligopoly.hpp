#ifndef NETPRICING_OLIGOPOLY_HPP
#define NETPRICING_OLIGOPOLY_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "netpricing/equilibrium.hpp"
#include "netpricing/monopoly.hpp"
#include "netpricing/network.hpp"

namespace netpricing {

enum class PartitionScheme { RandomEqual, Alternating };

/// Splits consumers among n_svs vendors (two, in this market model) into a
/// balanced partition: sizes differ by at most one. Returns the vendor index
/// per consumer. Clients never switch vendors afterwards.
std::vector<int> partition_consumers(int n, int n_svs, PartitionScheme scheme,
                                     std::uint64_t seed);

struct DuopolyParams {
    PricingScenario scenario = PricingScenario::Differentiated;
    double tol = 1e-6;
    int max_rounds = 100;
    bool sequential = false;       ///< update vendors one after another within a round
    bool full_information = true;  ///< false: each vendor models only its own sub-block of G
    double binary_deviation = 0.15;
    int rounding_trials = 200;
    std::uint64_t seed = 0;
};

/// One vendor's profit-maximizing prices over its own clients, holding the
/// rival's prices fixed; rival clients' investments enter through the shared
/// subgame. prices carries the full price vector (rival entries are read);
/// the result is the full vector with the vendor's entries replaced.
Eigen::VectorXd sv_best_response(const ExternalityNetwork& net,
                                 const std::vector<int>& assignment,
                                 const Eigen::VectorXd& prices, int sv,
                                 const DuopolyParams& params);

struct MarketState {
    Eigen::VectorXd prices;
    Investments investments;
    int round = 0;
    Eigen::Vector2d profits = Eigen::Vector2d::Zero();
    Eigen::Vector2d profit_ratios = Eigen::Vector2d::Zero();  ///< baseline / current, per vendor
};

struct MarketRun {
    std::vector<MarketState> trajectory;
    bool converged = false;
    bool oscillating = false;
    double final_gap = 0.0;
    Eigen::Vector2d baseline_profits = Eigen::Vector2d::Zero();  ///< externality-blind benchmark
};

/**
 * Repeated best-response play between two vendors sharing the network: each
 * round both vendors re-optimize against the rival's latest prices
 * (simultaneously by default), the full-network subgame is re-solved, and the
 * run stops when the max price change drops below tol. A round-over-round
 * non-decreasing gap across a trailing window is reported as oscillation.
 * Per-vendor profit ratios compare the externality-blind benchmark (both
 * vendors at p = (alpha + c 1)/2) to the current profits.
 */
MarketRun run_market(const ExternalityNetwork& net, const std::vector<int>& assignment,
                     const DuopolyParams& params);

} // namespace netpricing

#endif
