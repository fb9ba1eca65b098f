#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "netpricing/equilibrium.hpp"
#include "netpricing/errors.hpp"
#include "netpricing/rng.hpp"
#include "support.hpp"

using namespace netpricing;
using test_support::random_net;

namespace {

ExternalityNetwork two_node_pair(double beta = 2.0) {
    Eigen::MatrixXd G(2, 2);
    G << 0, 1, 1, 0;
    return make_network(G, Eigen::VectorXd::Constant(2, 2.0),
                        Eigen::VectorXd::Constant(2, beta), 0.5);
}

} // namespace

TEST_CASE("spectral_radius_check: zero matrix") {
    auto net = make_network(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Constant(3, 2.0),
                            Eigen::VectorXd::Constant(3, 2.0), 0.5);
    auto check = spectral_radius_check(net);
    CHECK(check.radius == doctest::Approx(0.0));
    CHECK(check.invertible);
}

TEST_CASE("spectral_radius_check: 2-node pair has radius 1/4") {
    auto check = spectral_radius_check(two_node_pair());
    CHECK(check.radius == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(check.invertible);
}

TEST_CASE("spectral_radius_check: strictly concave networks stay below one") {
    for (int t = 0; t < 40; ++t) {
        auto net = random_net(3 + t % 12, 100 + t);
        REQUIRE(net.strictly_concave);
        CHECK(spectral_radius_check(net).radius < 1.0);
    }
}

TEST_CASE("bonacich: identity weight pass-through and 2-node solve") {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 0.75);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(2, 0.25);

    CHECK((bonacich(Eigen::MatrixXd::Zero(2, 2), d, w) - w).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::MatrixXd G(2, 2);
    G << 0, 1, 1, 0;
    Eigen::VectorXd b = bonacich(G, d, w);
    CHECK(b(0) == doctest::Approx(1.0).epsilon(1e-12));  // (I - GD)^{-1} rows (16/15, 4/15)
    CHECK(b(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bonacich: matches the truncated Neumann series") {
    Rng rng(7);
    const int n = 10;
    auto net = random_net(n, 321);
    Eigen::VectorXd d = (0.5 / net.beta.array()).matrix();
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.uniform(0.1, 1.0);

    Eigen::VectorXd b = bonacich(net.G, d, w);

    Eigen::MatrixXd gd = net.G * d.asDiagonal();
    Eigen::VectorXd series = w, term = w;
    for (int k = 0; k < 400; ++k) {
        term = gd * term;
        series += term;
    }
    CHECK((b - series).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bonacich: spectral violation carries the radius") {
    Eigen::MatrixXd G(2, 2);
    G << 0, 1, 1, 0;
    Eigen::VectorXd d = Eigen::VectorXd::Constant(2, 2.0);  // rho(GD) = 2
    try {
        bonacich(G, d, Eigen::VectorXd::Ones(2));
        FAIL("expected SpectralConditionError");
    } catch (const SpectralConditionError& e) {
        CHECK(e.radius == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("ne_closed_form: no-externality closed form") {
    auto net = make_network(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Constant(3, 2.0),
                            Eigen::VectorXd::Constant(3, 2.0), 0.5);
    auto inv = ne_closed_form(net, Eigen::VectorXd::Ones(3));
    CHECK((inv.x.array() - 0.25).abs().maxCoeff() < 1e-15);  // (2-1)/(2*2)
    CHECK(inv.interior());
}

TEST_CASE("ne_closed_form: symmetric 2-node fixed point") {
    auto inv = ne_closed_form(two_node_pair(), Eigen::VectorXd::Ones(2));
    CHECK(inv.x(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(inv.x(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ne_closed_form: singular subgame system is reported") {
    // beta = 0.5 makes Q - G = [[1,-1],[-1,1]] exactly singular
    auto net = two_node_pair(0.5);
    CHECK_THROWS_AS(ne_closed_form(net, Eigen::VectorXd::Ones(2)), SingularSystemError);
}

TEST_CASE("ne_best_response_iteration: immediate convergence without externalities") {
    auto net = make_network(Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Constant(4, 2.0),
                            Eigen::VectorXd::Constant(4, 2.0), 0.5);
    Eigen::VectorXd p = Eigen::VectorXd::Ones(4);
    Eigen::VectorXd x0 = Eigen::VectorXd::Constant(4, 5.0);
    auto inv = ne_best_response_iteration(net, p, x0);
    CHECK(inv.iterations <= 2);
    CHECK((inv.x.array() - 0.25).abs().maxCoeff() < 1e-14);
}

TEST_CASE("ne_best_response_iteration: agrees with the closed form") {
    auto inv = ne_best_response_iteration(two_node_pair(), Eigen::VectorXd::Ones(2),
                                          Eigen::VectorXd::Zero(2));
    CHECK(inv.x(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK_FALSE(inv.clamped);
}

TEST_CASE("ne_best_response_iteration: unique limit from many starts") {
    auto net = random_net(10, 99);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(10, 1.0);
    Eigen::VectorXd reference = ne_closed_form(net, p).x;
    Rng rng(5);
    for (int s = 0; s < 20; ++s) {
        Eigen::VectorXd x0(10);
        for (int i = 0; i < 10; ++i) x0(i) = rng.uniform(0.0, 4.0);
        auto inv = ne_best_response_iteration(net, p, x0, 1e-12);
        CHECK((inv.x - reference).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("ne_best_response_iteration: clamps when a price exceeds alpha") {
    auto net = two_node_pair();
    Eigen::VectorXd p(2);
    p << 5.0, 1.0;  // alpha_0 - p_0 < 0
    auto inv = ne_best_response_iteration(net, p, Eigen::VectorXd::Zero(2));
    CHECK(inv.clamped);
    CHECK(inv.x(0) >= 0.0);
    CHECK_FALSE(ne_closed_form(net, p).interior());  // closed form disagrees, reported via flag
}

TEST_CASE("ne_best_response_iteration: iteration budget error carries state") {
    auto net = random_net(6, 123);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(6, 1.0);
    try {
        ne_best_response_iteration(net, p, Eigen::VectorXd::Zero(6), 1e-14, 2);
        FAIL("expected IterationLimitError");
    } catch (const IterationLimitError& e) {
        CHECK(e.last_iterate.size() == 6);
        CHECK(e.residual >= 0.0);
    }
}

TEST_CASE("equilibrium satisfies the first-order conditions") {
    for (int t = 0; t < 10; ++t) {
        auto net = random_net(8, 500 + t);
        Eigen::VectorXd p = Eigen::VectorXd::Constant(8, 1.0);
        auto inv = ne_closed_form(net, p);
        if (inv.interior()) CHECK(best_response_residual(net, p, inv.x) < 1e-6);
    }
}

TEST_CASE("equilibrium investments are monotone in the externality weights") {
    for (int t = 0; t < 8; ++t) {
        auto net = random_net(7, 900 + t, 0.5, 0.6);
        Eigen::VectorXd p = Eigen::VectorXd::Constant(7, 1.0);
        Eigen::VectorXd base = ne_closed_form(net, p).x;
        auto bumped = net;
        bumped.G(2, 4) += 0.05;
        bumped.refresh_diagnostics();
        Eigen::VectorXd raised = ne_closed_form(bumped, p).x;
        CHECK(((raised - base).array() >= -1e-12).all());
    }
}
