#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netpricing/network.hpp"
#include "netpricing/rng.hpp"
#include "support.hpp"

using namespace netpricing;

namespace {

Eigen::VectorXd consts(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

TopologyConfig pa_config(int n, double mu, std::uint64_t seed, double exponent = 3.0) {
    TopologyConfig tc;
    tc.kind = TopologyKind::PreferentialAttachment;
    tc.n = n;
    tc.mu = mu;
    tc.pa_exponent = exponent;
    tc.seed = seed;
    return tc;
}

TopologyConfig tree_config(int n, double mu, double lambda, std::uint64_t seed) {
    TopologyConfig tc;
    tc.kind = TopologyKind::PoissonTree;
    tc.n = n;
    tc.mu = mu;
    tc.lambda = lambda;
    tc.seed = seed;
    return tc;
}

// Undirected support edge count of G (pairs i<j with either direction set).
int undirected_edges(const Eigen::MatrixXd& G) {
    int count = 0;
    for (int i = 0; i < G.rows(); ++i)
        for (int j = i + 1; j < G.cols(); ++j)
            if (G(i, j) != 0.0 || G(j, i) != 0.0) ++count;
    return count;
}

} // namespace

TEST_CASE("build_network: 2-node reciprocal pair") {
    Eigen::MatrixXd adj(2, 2);
    adj << 0, 1, 1, 0;
    auto net = build_network(adj, consts(2, 2.0), consts(2, 2.0), 0.5);
    CHECK(net.G(0, 1) == 1.0);
    CHECK(net.G(1, 0) == 1.0);
    CHECK(net.G(0, 0) == 0.0);
    CHECK(net.strictly_concave);  // 2*2 > 1
    CHECK(net.positive_demand);
}

TEST_CASE("build_network: empty adjacency keeps zero matrix") {
    auto net = build_network(Eigen::MatrixXd::Zero(3, 3), consts(3, 2.0), consts(3, 2.0), 0.5);
    CHECK(net.G.isZero(0.0));
    CHECK(net.strictly_concave);
}

TEST_CASE("build_network: input validation") {
    CHECK_THROWS_AS(build_network(Eigen::MatrixXd::Zero(2, 3), consts(2, 2), consts(2, 2), 0.5),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_network(Eigen::MatrixXd::Zero(3, 3), consts(2, 2), consts(2, 2), 0.5),
                    std::invalid_argument);
    Eigen::MatrixXd self = Eigen::MatrixXd::Zero(2, 2);
    self(0, 0) = 1.0;
    CHECK_THROWS_AS(build_network(self, consts(2, 2), consts(2, 2), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_network(Eigen::MatrixXd::Zero(2, 2), consts(2, 2), consts(2, 0.0), 0.5),
                    std::invalid_argument);
    Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2, 2);
    neg(0, 1) = -0.1;
    CHECK_THROWS_AS(make_network(neg, consts(2, 2), consts(2, 2), 0.5), std::invalid_argument);
}

TEST_CASE("generate_pa: row normalization at the orientation endpoints") {
    for (double mu : {0.0, 1.0}) {
        auto net = generate_pa(pa_config(50, mu, 11));
        CHECK(net.n() == 50);
        CHECK((net.G.array() >= 0.0).all());
        CHECK(net.G.diagonal().isZero(0.0));
        for (int i = 0; i < net.n(); ++i) {
            const double rs = net.G.row(i).sum();
            if (rs > 0.0) CHECK(rs == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK(net.alpha(0) == 2.0);
        CHECK(net.c == 0.5);
    }
}

TEST_CASE("generate_pa: mixed rows sum to one when both orientations are present") {
    auto net = generate_pa(pa_config(60, 0.35, 4));
    auto g1 = generate_pa(pa_config(60, 1.0, 4));
    auto g2 = generate_pa(pa_config(60, 0.0, 4));
    for (int i = 0; i < net.n(); ++i) {
        const bool later = g1.G.row(i).sum() > 0.0;    // neighbors born after i
        const bool earlier = g2.G.row(i).sum() > 0.0;  // neighbors born before i
        if (later && earlier)
            CHECK(net.G.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("generate_pa: influence value is an elementwise linear mix") {
    const std::uint64_t seed = 77;
    auto g1 = generate_pa(pa_config(40, 1.0, seed));
    auto g0 = generate_pa(pa_config(40, 0.0, seed));
    for (double mu : {0.25, 0.5, 0.9}) {
        auto gm = generate_pa(pa_config(40, mu, seed));
        Eigen::MatrixXd expect = mu * g1.G + (1.0 - mu) * g0.G;
        CHECK((gm.G - expect).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("generate_pa: configuration validation") {
    CHECK_THROWS_AS(generate_pa(pa_config(2, 0.5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(generate_pa(pa_config(10, 1.5, 1)), std::invalid_argument);
    CHECK_THROWS_AS(generate_pa(pa_config(10, 0.5, 1, 0.9)), std::invalid_argument);
    CHECK_THROWS_AS(generate_poisson_tree(tree_config(10, 0.5, 0.0, 1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(generate_poisson_tree(pa_config(10, 0.5, 1)), std::invalid_argument);
}

TEST_CASE("generate_poisson_tree: exact truncation and tree edge count") {
    auto net = generate_poisson_tree(tree_config(50, 1.0, 3.0, 21));
    CHECK(net.n() == 50);
    CHECK(undirected_edges(net.G) == 49);
    CHECK(net.beta(0) == doctest::Approx(50.0 / 20.0));
}

TEST_CASE("generate_poisson_tree: subcritical process is retried then reported") {
    auto gen = generate_poisson_tree_detailed(tree_config(50, 0.5, 0.0001, 3));
    CHECK_FALSE(gen.reached_target);
    CHECK(gen.attempts == 200);
    CHECK(gen.net.n() >= 1);
}

TEST_CASE("generate_poisson_tree: root degree matches the conditioned Poisson mean") {
    // Conditioning on reaching the target size shifts E[root degree] from
    // lambda to (lambda - lambda q^2) / (1 - q), with q the extinction
    // probability of the branching process (fixed point q = exp(lambda(q-1))).
    const double lambda = 3.0;
    double q = 0.1;
    for (int it = 0; it < 200; ++it) q = std::exp(lambda * (q - 1.0));
    const double conditional_mean = (lambda - lambda * q * q) / (1.0 - q);

    const int samples = 600;
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        auto net = generate_poisson_tree(tree_config(400, 1.0, lambda, 5000 + s));
        // at mu = 1 the root's row spans exactly its children
        int degree = 0;
        for (int j = 0; j < net.n(); ++j)
            if (net.G(0, j) != 0.0) ++degree;
        sum += degree;
        sumsq += static_cast<double>(degree) * degree;
    }
    const double mean = sum / samples;
    const double var = (sumsq - samples * mean * mean) / (samples - 1);
    const double se = std::sqrt(var / samples);
    CHECK(std::abs(mean - conditional_mean) < 3.0 * se);
}

TEST_CASE("rng: raw Poisson sampler is unbiased") {
    Rng rng(99);
    const int samples = 4000;
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) sum += rng.poisson(3.0);
    const double se = std::sqrt(3.0 / samples);
    CHECK(std::abs(sum / samples - 3.0) < 3.0 * se);
}

TEST_CASE("generated networks satisfy the structural invariants") {
    for (std::uint64_t seed : {1, 2, 3}) {
        for (double mu : {0.0, 0.3, 1.0}) {
            auto pa = generate_pa(pa_config(40, mu, seed));
            CHECK((pa.G.array() >= 0.0).all());
            CHECK(pa.G.diagonal().isZero(0.0));
            auto tree = generate_poisson_tree(tree_config(40, mu, 3.0, seed));
            CHECK((tree.G.array() >= 0.0).all());
            CHECK(tree.G.diagonal().isZero(0.0));
            CHECK(undirected_edges(tree.G) == tree.n() - 1);
        }
    }
}

TEST_CASE("serialization round-trips at full precision") {
    auto net = test_support::random_net(7, 42);
    std::stringstream buf;
    write_network(net, buf);
    auto back = read_network(buf);
    CHECK(back.n() == net.n());
    CHECK((back.G - net.G).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.alpha - net.alpha).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.beta - net.beta).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.c == net.c);
    CHECK(back.strictly_concave == net.strictly_concave);
}

TEST_CASE("edge list export lists exactly the nonzero entries") {
    Eigen::MatrixXd adj(3, 3);
    adj << 0, 1, 1, 0, 0, 1, 0, 0, 0;
    auto net = build_network(adj, consts(3, 2.0), consts(3, 2.0), 0.5);
    const std::string path =
        (std::filesystem::temp_directory_path() / "netpricing_edges_test.csv").string();
    write_edges_csv(net, path);
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    CHECK(line == "i,j,h_ij");
    std::vector<std::string> rows;
    while (std::getline(f, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "0,1,0.5");
    CHECK(rows[1] == "0,2,0.5");
    CHECK(rows[2] == "1,2,1");
    std::filesystem::remove(path);
}

TEST_CASE("serialization rejects malformed input") {
    std::stringstream truncated("2 1.0 1.0");
    CHECK_THROWS(read_network(truncated));
    std::stringstream empty("");
    CHECK_THROWS(read_network(empty));
}
