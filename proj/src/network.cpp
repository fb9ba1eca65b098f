#include "netpricing/network.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "netpricing/rng.hpp"

namespace netpricing {

void ExternalityNetwork::refresh_diagnostics() {
    strictly_concave = true;
    positive_demand = true;
    for (int i = 0; i < n(); ++i) {
        if (!(2.0 * beta(i) > G.row(i).sum())) strictly_concave = false;
        if (!(alpha(i) > c)) positive_demand = false;
    }
}

ExternalityNetwork make_network(Eigen::MatrixXd G, Eigen::VectorXd alpha, Eigen::VectorXd beta,
                                double c) {
    if (G.rows() != G.cols()) throw std::invalid_argument("influence matrix must be square");
    const int n = static_cast<int>(G.rows());
    if (alpha.size() != n || beta.size() != n)
        throw std::invalid_argument("alpha/beta length does not match network size");
    for (int i = 0; i < n; ++i) {
        if (G(i, i) != 0.0) throw std::invalid_argument("influence matrix must have zero diagonal");
        for (int j = 0; j < n; ++j)
            if (G(i, j) < 0.0) throw std::invalid_argument("influence weights must be nonnegative");
        if (!(beta(i) > 0.0)) throw std::invalid_argument("beta entries must be positive");
    }
    ExternalityNetwork net{std::move(G), std::move(alpha), std::move(beta), c};
    net.refresh_diagnostics();
    return net;
}

ExternalityNetwork build_network(const Eigen::MatrixXd& adjacency, Eigen::VectorXd alpha,
                                 Eigen::VectorXd beta, double c) {
    if (adjacency.rows() != adjacency.cols())
        throw std::invalid_argument("adjacency matrix must be square");
    const int n = static_cast<int>(adjacency.rows());
    if (alpha.size() != n || beta.size() != n)
        throw std::invalid_argument("alpha/beta length does not match adjacency size");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (adjacency(i, i) != 0.0)
            throw std::invalid_argument("adjacency matrix must have zero diagonal");
        int d = 0;
        for (int j = 0; j < n; ++j)
            if (adjacency(i, j) != 0.0) ++d;
        if (d == 0) continue;  // isolated row: no externalities received
        for (int j = 0; j < n; ++j)
            if (adjacency(i, j) != 0.0) G(i, j) = 1.0 / static_cast<double>(d);
    }
    return make_network(std::move(G), std::move(alpha), std::move(beta), c);
}

void TopologyConfig::validate() const {
    if (n < 2) throw std::invalid_argument("topology needs at least 2 nodes");
    if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("mu must lie in [0, 1]");
    if (kind == TopologyKind::PoissonTree && !(lambda > 0.0))
        throw std::invalid_argument("lambda must be positive");
    if (kind == TopologyKind::PreferentialAttachment && !(pa_exponent > 1.0))
        throw std::invalid_argument("pa_exponent must exceed 1");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
}

Eigen::MatrixXd mixed_influence_matrix(const std::vector<std::pair<int, int>>& edges, int n,
                                       double mu) {
    // Orientation 1: the newer endpoint influences the older one, so the edge
    // lands in the older node's row. Orientation 2 is the reverse. Each
    // orientation is row-normalized on its own support before mixing.
    Eigen::MatrixXd g1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(n, n);
    std::vector<int> d1(n, 0), d2(n, 0);
    for (auto [older, newer] : edges) {
        ++d1[older];
        ++d2[newer];
    }
    for (auto [older, newer] : edges) {
        g1(older, newer) = 1.0 / static_cast<double>(d1[older]);
        g2(newer, older) = 1.0 / static_cast<double>(d2[newer]);
    }
    return mu * g1 + (1.0 - mu) * g2;
}

namespace {

ExternalityNetwork finish_generated(const std::vector<std::pair<int, int>>& edges, int n,
                                    double mu, double beta_value) {
    Eigen::MatrixXd G = mixed_influence_matrix(edges, n, mu);
    Eigen::VectorXd alpha = Eigen::VectorXd::Constant(n, 2.0);
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(n, beta_value);
    return make_network(std::move(G), std::move(alpha), std::move(beta), 0.5);
}

} // namespace

ExternalityNetwork generate_pa(const TopologyConfig& config) {
    config.validate();
    if (config.kind != TopologyKind::PreferentialAttachment)
        throw std::invalid_argument("generate_pa requires a PreferentialAttachment config");
    const int n = config.n;
    if (n < 3) throw std::invalid_argument("preferential attachment needs at least 3 nodes");

    const int m = 2;                                   // edges added per new node
    const double redirect = 1.0 / (config.pa_exponent - 1.0);
    Rng rng(derive_seed(config.seed, 0x9a, static_cast<std::uint64_t>(n)));

    // targets[v] holds the nodes v attached to at birth; redirection follows
    // these links, which is what produces the shifted-linear kernel.
    std::vector<std::vector<int>> targets(n);
    std::vector<std::pair<int, int>> edges;  // (older, newer)
    edges.reserve(static_cast<std::size_t>(m) * n);

    // Seed triangle.
    const int seed_nodes = std::min(n, m + 1);
    for (int v = 1; v < seed_nodes; ++v)
        for (int u = 0; u < v; ++u) {
            edges.emplace_back(u, v);
            targets[v].push_back(u);
        }

    for (int v = seed_nodes; v < n; ++v) {
        std::vector<int> chosen;
        for (int e = 0; e < m && static_cast<int>(chosen.size()) < v; ++e) {
            int u = -1;
            for (int attempt = 0; attempt < 64; ++attempt) {
                u = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
                if (rng.bernoulli(redirect) && !targets[u].empty())
                    u = targets[u][rng.below(targets[u].size())];
                if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) break;
                u = -1;
            }
            if (u < 0) continue;  // could not find a distinct target
            chosen.push_back(u);
            edges.emplace_back(u, v);
            targets[v].push_back(u);
        }
    }
    return finish_generated(edges, n, config.mu, config.beta);
}

namespace {

struct TreeAttempt {
    std::vector<std::pair<int, int>> edges;  // (parent, child) = (older, newer)
    int nodes = 1;
    bool reached_target = false;
};

TreeAttempt sample_tree(Rng& rng, int target_n, double lambda, int depth_cap) {
    TreeAttempt out;
    std::vector<int> frontier{0};  // node ids at the current depth
    std::vector<int> next;
    int depth = 0;
    while (!frontier.empty() && depth < depth_cap && out.nodes < target_n) {
        next.clear();
        for (int parent : frontier) {
            const int children = rng.poisson(lambda);
            for (int k = 0; k < children && out.nodes < target_n; ++k) {
                const int child = out.nodes++;
                out.edges.emplace_back(parent, child);
                next.push_back(child);
            }
            if (out.nodes >= target_n) break;
        }
        frontier = next;
        ++depth;
    }
    out.reached_target = (out.nodes >= target_n);
    return out;
}

} // namespace

TreeGeneration generate_poisson_tree_detailed(const TopologyConfig& config) {
    config.validate();
    if (config.kind != TopologyKind::PoissonTree)
        throw std::invalid_argument("generate_poisson_tree requires a PoissonTree config");

    constexpr int kRetryCap = 200;
    Rng rng(derive_seed(config.seed, 0x7e, static_cast<std::uint64_t>(config.n)));
    TreeAttempt best;
    int attempts = 0;
    while (attempts < kRetryCap) {
        ++attempts;
        TreeAttempt t = sample_tree(rng, config.n, config.lambda, config.depth_cap);
        if (t.nodes > best.nodes || attempts == 1) best = std::move(t);
        if (best.reached_target) break;
    }

    TreeGeneration out;
    out.attempts = attempts;
    out.reached_target = best.reached_target;
    const int n = best.nodes;
    const double beta_value = static_cast<double>(n) / 20.0;
    if (n == 1) {
        // Degenerate single-root process: an externality-free 1-node network.
        out.net = make_network(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 2.0),
                               Eigen::VectorXd::Constant(1, std::max(beta_value, 0.05)), 0.5);
        return out;
    }
    out.net = finish_generated(best.edges, n, config.mu, beta_value);
    return out;
}

ExternalityNetwork generate_poisson_tree(const TopologyConfig& config) {
    return generate_poisson_tree_detailed(config).net;
}

// --- serialization ---------------------------------------------------------

namespace {

std::string full_precision(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace

void write_network(const ExternalityNetwork& net, std::ostream& out) {
    const int n = net.n();
    out << n;
    for (int i = 0; i < n; ++i) out << ' ' << full_precision(net.alpha(i));
    for (int i = 0; i < n; ++i) out << ' ' << full_precision(net.beta(i));
    out << ' ' << full_precision(net.c) << '\n';
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j) out << ' ';
            out << full_precision(net.G(i, j));
        }
        out << '\n';
    }
}

void write_network_file(const ExternalityNetwork& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_network(net, f);
}

ExternalityNetwork read_network(std::istream& in) {
    int n = 0;
    if (!(in >> n) || n <= 0 || n > 1000000)
        throw std::runtime_error("network file: bad or missing size header");
    Eigen::VectorXd alpha(n), beta(n);
    double c = 0.0;
    for (int i = 0; i < n; ++i)
        if (!(in >> alpha(i))) throw std::runtime_error("network file: truncated alpha vector");
    for (int i = 0; i < n; ++i)
        if (!(in >> beta(i))) throw std::runtime_error("network file: truncated beta vector");
    if (!(in >> c)) throw std::runtime_error("network file: missing cost");
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!(in >> G(i, j))) throw std::runtime_error("network file: truncated matrix row");
    return make_network(std::move(G), std::move(alpha), std::move(beta), c);
}

ExternalityNetwork read_network_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open network file: " + path);
    return read_network(f);
}

void write_edges_csv(const ExternalityNetwork& net, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "i,j,h_ij\n";
    for (int i = 0; i < net.n(); ++i)
        for (int j = 0; j < net.n(); ++j)
            if (net.G(i, j) != 0.0) f << i << ',' << j << ',' << full_precision(net.G(i, j)) << '\n';
}

} // namespace netpricing
