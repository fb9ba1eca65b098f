#ifndef NETPRICING_NETWORK_HPP
#define NETPRICING_NETWORK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace netpricing {

/**
 * Consumer externality network: n consumers with linear-quadratic utilities
 *   u_i(x) = alpha_i x_i - beta_i x_i^2 + x_i * sum_j G(i,j) x_j - p_i x_i,
 * where G(i,j) >= 0 is the per-unit influence of consumer j's investment on
 * consumer i. The vendor produces at constant marginal cost c.
 */
struct ExternalityNetwork {
    Eigen::MatrixXd G;      ///< influence weights, zero diagonal, entries >= 0
    Eigen::VectorXd alpha;  ///< linear utility coefficients
    Eigen::VectorXd beta;   ///< quadratic utility coefficients, > 0
    double c = 0.0;         ///< marginal production cost

    // Diagnostics computed on construction; violations are reported, not rejected.
    bool strictly_concave = false;  ///< 2*beta_i > sum_j G(i,j) for every i
    bool positive_demand = false;   ///< alpha_i > c for every i

    int n() const { return static_cast<int>(G.rows()); }

    /// Q = diag(2*beta_i).
    Eigen::MatrixXd q_matrix() const {
        return (2.0 * beta).asDiagonal().toDenseMatrix();
    }

    void refresh_diagnostics();
};

/// Assembles a network from a directed 0/1 adjacency matrix, normalizing each
/// row to weight 1/d_i per out-edge. Rows without out-edges stay zero.
/// Throws std::invalid_argument on non-square input, a nonzero diagonal, or a
/// dimension mismatch with the parameter vectors.
ExternalityNetwork build_network(const Eigen::MatrixXd& adjacency, Eigen::VectorXd alpha,
                                 Eigen::VectorXd beta, double c);

/// Validating constructor for an explicit weight matrix.
ExternalityNetwork make_network(Eigen::MatrixXd G, Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                double c);

enum class TopologyKind { PreferentialAttachment, PoissonTree };

/**
 * Parameters for the synthetic topology generators. The influence value mu
 * mixes the two orientations of the grown graph: mu = 1 keeps only the
 * direction where later-born consumers influence earlier-born ones, mu = 0
 * only the reverse.
 */
struct TopologyConfig {
    TopologyKind kind = TopologyKind::PreferentialAttachment;
    int n = 50;                  ///< target consumer count
    double mu = 1.0;             ///< influence value in [0, 1]
    double pa_exponent = 3.0;    ///< scale-free degree exponent (PA only)
    double lambda = 3.0;         ///< Poisson branching parameter (tree only)
    int depth_cap = 999999;      ///< maximum tree depth
    double beta = 2.0;           ///< utility curvature applied to all consumers (PA)
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

/**
 * Grows a scale-free graph by uniform attachment with redirection: each new
 * node links to m = 2 targets, each chosen uniformly among existing nodes and
 * redirected to one of the chosen node's own targets with probability
 * r = 1/(pa_exponent - 1). This realizes the shifted-linear attachment kernel
 * with degree-tail exponent pa_exponent (r = 1/2 -> 3, 2/3 -> 2.5, 1 -> 2).
 * Utility parameters: alpha_i = 2, c = 0.5, beta_i = config.beta.
 */
ExternalityNetwork generate_pa(const TopologyConfig& config);

/// Tree generation report; attempts counts restarts of the branching process.
struct TreeGeneration {
    ExternalityNetwork net;
    int attempts = 1;
    bool reached_target = true;  ///< false when every attempt went extinct early
};

/**
 * Samples a Poisson(lambda) branching process in breadth-first order until
 * extinction, the depth cap, or the target node count (truncating there).
 * Extinct undersized attempts are retried with fresh randomness up to a
 * retry cap; the largest attempt is kept and reported if none reaches the
 * target. Utility parameters: alpha_i = 2, c = 0.5, beta_i = node_count/20.
 * The same mu-orientation mixing as generate_pa applies, with birth order
 * given by BFS creation order.
 */
TreeGeneration generate_poisson_tree_detailed(const TopologyConfig& config);
ExternalityNetwork generate_poisson_tree(const TopologyConfig& config);

/// Mixed influence matrix for an edge list whose pairs are (older, newer):
/// row-normalizes each orientation separately, then returns
/// mu * G_newer_influences_older + (1 - mu) * G_older_influences_newer.
Eigen::MatrixXd mixed_influence_matrix(const std::vector<std::pair<int, int>>& edges, int n,
                                       double mu);

// --- serialization ---------------------------------------------------------
// Plain-text format: one header line "n alpha_1..alpha_n beta_1..beta_n c",
// then n whitespace-separated rows of G. Round-trips at full precision.

void write_network(const ExternalityNetwork& net, std::ostream& out);
void write_network_file(const ExternalityNetwork& net, const std::string& path);
ExternalityNetwork read_network(std::istream& in);
ExternalityNetwork read_network_file(const std::string& path);

/// CSV edge list "i,j,h_ij" of the nonzero entries of G.
void write_edges_csv(const ExternalityNetwork& net, const std::string& path);

} // namespace netpricing

#endif
