// Python bindings for the pricing library: network construction and
// generation, subgame equilibria, monopoly/binary/duopoly pricing, and the
// batch experiment runner.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netpricing/binary.hpp"
#include "netpricing/equilibrium.hpp"
#include "netpricing/harness.hpp"
#include "netpricing/monopoly.hpp"
#include "netpricing/network.hpp"
#include "netpricing/oligopoly.hpp"

namespace py = pybind11;
using namespace netpricing;

namespace {

TopologyConfig make_topology(const std::string& kind, int n, double mu, double pa_exponent,
                             double lambda, int depth_cap, double beta, std::uint64_t seed) {
    TopologyConfig tc;
    if (kind == "pa")
        tc.kind = TopologyKind::PreferentialAttachment;
    else if (kind == "tree")
        tc.kind = TopologyKind::PoissonTree;
    else
        throw std::invalid_argument("kind must be 'pa' or 'tree'");
    tc.n = n;
    tc.mu = mu;
    tc.pa_exponent = pa_exponent;
    tc.lambda = lambda;
    tc.depth_cap = depth_cap;
    tc.beta = beta;
    tc.seed = seed;
    return tc;
}

PricingScenario scenario_from(const std::string& s) {
    if (s == "uniform") return PricingScenario::Uniform;
    if (s == "binary") return PricingScenario::Binary;
    if (s == "differentiated") return PricingScenario::Differentiated;
    throw std::invalid_argument("scenario must be uniform, binary or differentiated");
}

} // namespace

PYBIND11_MODULE(_netpricing, m) {
    m.doc() = "Stackelberg pricing on consumer externality networks";

    py::class_<ExternalityNetwork>(m, "ExternalityNetwork")
        .def_readonly("G", &ExternalityNetwork::G)
        .def_readonly("alpha", &ExternalityNetwork::alpha)
        .def_readonly("beta", &ExternalityNetwork::beta)
        .def_readonly("c", &ExternalityNetwork::c)
        .def_readonly("strictly_concave", &ExternalityNetwork::strictly_concave)
        .def_readonly("positive_demand", &ExternalityNetwork::positive_demand)
        .def_property_readonly("n", &ExternalityNetwork::n)
        .def("__repr__", [](const ExternalityNetwork& net) {
            return "<ExternalityNetwork n=" + std::to_string(net.n()) + ">";
        });

    m.def("make_network", &make_network, py::arg("G"), py::arg("alpha"), py::arg("beta"),
          py::arg("c"));
    m.def("build_network", &build_network, py::arg("adjacency"), py::arg("alpha"),
          py::arg("beta"), py::arg("c"),
          "Row-normalized influence matrix from a 0/1 adjacency matrix");
    m.def(
        "generate",
        [](const std::string& kind, int n, double mu, double pa_exponent, double lambda,
           int depth_cap, double beta, std::uint64_t seed) {
            TopologyConfig tc =
                make_topology(kind, n, mu, pa_exponent, lambda, depth_cap, beta, seed);
            return tc.kind == TopologyKind::PreferentialAttachment ? generate_pa(tc)
                                                                   : generate_poisson_tree(tc);
        },
        py::arg("kind"), py::arg("n"), py::arg("mu") = 1.0, py::arg("pa_exponent") = 3.0,
        py::arg("lambda_") = 3.0, py::arg("depth_cap") = 999999, py::arg("beta") = 2.0,
        py::arg("seed") = 0, "Generate a synthetic topology ('pa' or 'tree')");
    m.def("read_network_file", &read_network_file, py::arg("path"));
    m.def("write_network_file", &write_network_file, py::arg("net"), py::arg("path"));

    py::class_<Investments>(m, "Investments")
        .def_readonly("x", &Investments::x)
        .def_readonly("clamped", &Investments::clamped)
        .def_readonly("iterations", &Investments::iterations)
        .def_property_readonly("interior", &Investments::interior);

    py::class_<SpectralCheck>(m, "SpectralCheck")
        .def_readonly("radius", &SpectralCheck::radius)
        .def_readonly("invertible", &SpectralCheck::invertible);

    m.def("spectral_radius_check", &spectral_radius_check, py::arg("net"));
    m.def("bonacich", &bonacich, py::arg("G"), py::arg("d_diag"), py::arg("w"),
          "Weighted Bonacich centrality (I - G diag(d))^{-1} w");
    m.def("influence_centrality", &influence_centrality, py::arg("net"));
    m.def("ne_closed_form", &ne_closed_form, py::arg("net"), py::arg("prices"));
    m.def("ne_best_response_iteration", &ne_best_response_iteration, py::arg("net"),
          py::arg("prices"), py::arg("x0"), py::arg("tol") = 1e-10,
          py::arg("max_iter") = 10000);

    py::class_<PricingOutcome>(m, "PricingOutcome")
        .def_readonly("prices", &PricingOutcome::prices)
        .def_readonly("investments", &PricingOutcome::investments)
        .def_readonly("profit", &PricingOutcome::profit)
        .def_property_readonly("scenario", [](const PricingOutcome& o) {
            return std::string(to_string(o.scenario));
        });

    py::class_<PriceDecomposition>(m, "PriceDecomposition")
        .def_readonly("base", &PriceDecomposition::base)
        .def_readonly("markup", &PriceDecomposition::markup)
        .def_readonly("discount", &PriceDecomposition::discount);

    py::class_<DifferentiatedOutcome>(m, "DifferentiatedOutcome")
        .def_readonly("outcome", &DifferentiatedOutcome::outcome)
        .def_readonly("parts", &DifferentiatedOutcome::parts);

    m.def("optimal_differentiated_prices", &optimal_differentiated_prices, py::arg("net"));
    m.def("optimal_uniform_price", &optimal_uniform_price, py::arg("net"));

    py::class_<Profits>(m, "Profits")
        .def_readonly("p0", &Profits::p0)
        .def_readonly("p1", &Profits::p1);
    m.def("profits_p0_p1", &profits_p0_p1, py::arg("net"));

    py::class_<BoundForm>(m, "BoundForm")
        .def_readonly("lower", &BoundForm::lower)
        .def_readonly("upper", &BoundForm::upper)
        .def_readonly("brackets", &BoundForm::brackets);

    py::class_<ProfitRatioReport>(m, "ProfitRatioReport")
        .def_readonly("ratio", &ProfitRatioReport::ratio)
        .def_readonly("theorem_statement", &ProfitRatioReport::theorem_statement)
        .def_readonly("proof_form", &ProfitRatioReport::proof_form);
    m.def("profit_ratio_bounds", &profit_ratio_bounds, py::arg("net"));

    py::class_<BinaryPricingProblem>(m, "BinaryPricingProblem")
        .def(py::init<ExternalityNetwork, double, double>(), py::arg("net"), py::arg("p_reg"),
             py::arg("p_dsc"))
        .def_readonly("p_reg", &BinaryPricingProblem::p_reg)
        .def_readonly("p_dsc", &BinaryPricingProblem::p_dsc)
        .def_readonly("margin_warning", &BinaryPricingProblem::margin_warning)
        .def_property_readonly("delta", &BinaryPricingProblem::delta)
        .def("objective", &BinaryPricingProblem::objective, py::arg("y"));

    py::class_<QuadraticForm>(m, "QuadraticForm")
        .def_readonly("Qhat", &QuadraticForm::Qhat)
        .def_readonly("d", &QuadraticForm::d)
        .def_readonly("z", &QuadraticForm::z)
        .def("value", &QuadraticForm::value, py::arg("y"))
        .def("guarantee_shift", &QuadraticForm::guarantee_shift);
    m.def("reformulate", &reformulate, py::arg("problem"));

    py::class_<BruteForceResult>(m, "BruteForceResult")
        .def_readonly("y_star", &BruteForceResult::y_star)
        .def_readonly("w_opt", &BruteForceResult::w_opt);
    m.def("brute_force_opt", &brute_force_opt, py::arg("problem"), py::arg("max_n") = 22);

    py::class_<SdpSolution>(m, "SdpSolution")
        .def_readonly("V", &SdpSolution::V)
        .def_readonly("sdp_objective", &SdpSolution::sdp_objective)
        .def_readonly("sweeps", &SdpSolution::sweeps);
    m.def("solve_sdp_relaxation", &solve_sdp_relaxation, py::arg("qf"), py::arg("tol") = 1e-9,
          py::arg("seed") = 0x5d7e19af);

    py::class_<RoundingResult>(m, "RoundingResult")
        .def_readonly("y_best", &RoundingResult::y_best)
        .def_readonly("w_alg", &RoundingResult::w_alg)
        .def_readonly("w_mean", &RoundingResult::w_mean)
        .def_readonly("w_stderr", &RoundingResult::w_stderr);
    m.def("round_hyperplane", &round_hyperplane, py::arg("sdp"), py::arg("qf"),
          py::arg("trials"), py::arg("rng_seed"));

    m.def("compute_r", &compute_r, py::arg("problem"));

    py::class_<BinaryPipelineResult>(m, "BinaryPipelineResult")
        .def_readonly("outcome", &BinaryPipelineResult::outcome)
        .def_readonly("y", &BinaryPipelineResult::y)
        .def_readonly("w_alg", &BinaryPipelineResult::w_alg)
        .def_readonly("w_mean", &BinaryPipelineResult::w_mean)
        .def_readonly("r_constant", &BinaryPipelineResult::r_constant)
        .def_readonly("w_opt", &BinaryPipelineResult::w_opt)
        .def_readonly("achieved_ratio", &BinaryPipelineResult::achieved_ratio);
    m.def("binary_pricing_pipeline", &binary_pricing_pipeline, py::arg("problem"),
          py::arg("trials") = 500, py::arg("seed") = 0, py::arg("brute_cap") = 18);

    m.def(
        "partition_consumers",
        [](int n, int n_svs, const std::string& scheme, std::uint64_t seed) {
            return partition_consumers(n, n_svs,
                                       scheme == "alternating" ? PartitionScheme::Alternating
                                                               : PartitionScheme::RandomEqual,
                                       seed);
        },
        py::arg("n"), py::arg("n_svs") = 2, py::arg("scheme") = "random_equal",
        py::arg("seed") = 0);

    py::class_<MarketState>(m, "MarketState")
        .def_readonly("prices", &MarketState::prices)
        .def_readonly("round", &MarketState::round)
        .def_property_readonly("profits",
                               [](const MarketState& s) {
                                   return std::pair<double, double>(s.profits(0), s.profits(1));
                               })
        .def_property_readonly("profit_ratios", [](const MarketState& s) {
            return std::pair<double, double>(s.profit_ratios(0), s.profit_ratios(1));
        });

    py::class_<MarketRun>(m, "MarketRun")
        .def_readonly("trajectory", &MarketRun::trajectory)
        .def_readonly("converged", &MarketRun::converged)
        .def_readonly("oscillating", &MarketRun::oscillating)
        .def_readonly("final_gap", &MarketRun::final_gap);

    m.def(
        "run_market",
        [](const ExternalityNetwork& net, const std::vector<int>& assignment,
           const std::string& scenario, double tol, int max_rounds, bool sequential,
           double binary_deviation, int rounding_trials, std::uint64_t seed) {
            DuopolyParams params;
            params.scenario = scenario_from(scenario);
            params.tol = tol;
            params.max_rounds = max_rounds;
            params.sequential = sequential;
            params.binary_deviation = binary_deviation;
            params.rounding_trials = rounding_trials;
            params.seed = seed;
            return run_market(net, assignment, params);
        },
        py::arg("net"), py::arg("assignment"), py::arg("scenario") = "differentiated",
        py::arg("tol") = 1e-6, py::arg("max_rounds") = 100, py::arg("sequential") = false,
        py::arg("binary_deviation") = 0.15, py::arg("rounding_trials") = 200,
        py::arg("seed") = 0);

    m.def(
        "run_experiment_files",
        [](const std::string& config_text, const std::string& output_dir) {
            ExperimentConfig cfg = parse_config_text(config_text);
            cfg.output_dir = output_dir;
            cfg.apply_defaults();
            cfg.validate();
            const ExperimentResult result = run_experiment(cfg);
            return std::pair<std::vector<std::string>, std::vector<std::string>>(
                write_outputs(result, cfg), result.failures);
        },
        py::arg("config_text"), py::arg("output_dir"),
        "Run a batch experiment from a config string; returns (files, failures)");
}
