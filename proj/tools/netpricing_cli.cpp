// Experiment runner and single-instance solver for Stackelberg pricing on
// externality networks. Subcommands mirror the library's experiment kinds;
// see the README for the config-file schema and output formats.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "netpricing/binary.hpp"
#include "netpricing/equilibrium.hpp"
#include "netpricing/harness.hpp"
#include "netpricing/monopoly.hpp"
#include "netpricing/network.hpp"

namespace np = netpricing;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool plots = false;
};

// Config file first, then command-line flags on top.
np::ExperimentConfig assemble_config(const GlobalArgs& g, np::ExperimentKind kind,
                                     const std::vector<std::string>& overrides) {
    np::ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = np::load_config_file(g.config_path);
    else cfg.experiment = kind;
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        np::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
    if (!g.format.empty()) cfg.format = g.format;
    if (g.seed_set) cfg.seed = g.seed;
    if (g.plots) cfg.plots = true;
    cfg.apply_defaults();
    cfg.validate();
    return cfg;
}

int run_and_write(const np::ExperimentConfig& cfg) {
    const np::ExperimentResult result = np::run_experiment(cfg);
    const std::vector<std::string> files = np::write_outputs(result, cfg);
    for (const std::string& f : files) std::cout << "wrote " << f << "\n";
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " replicate(s) failed:\n";
        for (const std::string& msg : result.failures) std::cerr << "  " << msg << "\n";
    }
    return 0;
}

void print_vector(const char* label, const Eigen::VectorXd& v) {
    std::printf("%s:", label);
    for (int i = 0; i < v.size(); ++i) std::printf(" %.6g", v(i));
    std::printf("\n");
}

int cmd_solve(const std::string& network_path, double p_reg, double p_dsc, int trials,
              std::uint64_t seed, const std::string& edges_csv) {
    const np::ExternalityNetwork net = np::read_network_file(network_path);
    std::printf("network: n=%d, c=%.6g, strictly_concave=%s, positive_demand=%s\n", net.n(),
                net.c, net.strictly_concave ? "yes" : "no", net.positive_demand ? "yes" : "no");
    if (!edges_csv.empty()) {
        np::write_edges_csv(net, edges_csv);
        std::printf("wrote %s\n", edges_csv.c_str());
    }
    const np::SpectralCheck check = np::spectral_radius_check(net);
    std::printf("spectral radius of Q^-1 G: %.6g (system %s)\n", check.radius,
                check.invertible ? "invertible" : "singular");

    const np::PricingOutcome uni = np::optimal_uniform_price(net);
    std::printf("\n[uniform] price: %.6g, profit: %.6g\n", uni.prices(0), uni.profit);
    print_vector("investments", uni.investments.x);

    const np::DifferentiatedOutcome diff = np::optimal_differentiated_prices(net);
    std::printf("\n[differentiated] profit: %.6g\n", diff.outcome.profit);
    print_vector("prices", diff.outcome.prices);
    print_vector("investments", diff.outcome.investments.x);
    if (!diff.outcome.investments.interior())
        std::printf("warning: closed-form investments are not all positive\n");

    if (p_reg > p_dsc) {
        const np::BinaryPricingProblem prob(net, p_reg, p_dsc);
        if (prob.margin_warning)
            std::printf("warning: p_mid - c < delta; the two-price margin assumption fails\n");
        const np::BinaryPipelineResult bin = np::binary_pricing_pipeline(prob, trials, seed);
        std::printf("\n[binary] p_reg=%.6g p_dsc=%.6g profit: %.6g\n", p_reg, p_dsc,
                    bin.outcome.profit);
        print_vector("prices", bin.outcome.prices);
        print_vector("investments", bin.outcome.investments.x);
        if (bin.w_opt)
            std::printf("exact optimum %.6g, achieved ratio %.4f\n", *bin.w_opt,
                        *bin.achieved_ratio);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stackelberg pricing on externality networks"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "experiment config file (key = value lines)");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--format", g.format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
        g.seed_set = true;
    });
    app.add_flag("--plots", g.plots, "emit SVG plots alongside tables");

    std::vector<std::string> overrides;
    app.add_option("--set", overrides, "config override key=value (repeatable)");

    std::string topology = "pa";
    CLI::App* sweep = app.add_subcommand("sweep", "monopoly profit-ratio sweep over mu");
    sweep->fallthrough();  // global flags may follow the subcommand
    sweep->add_option("--topology", topology, "pa or tree")
        ->check(CLI::IsMember({"pa", "tree"}));

    CLI::App* duopoly = app.add_subcommand("duopoly", "two-vendor market sweep over mu");
    duopoly->fallthrough();
    CLI::App* fairness =
        app.add_subcommand("fairness", "price-vs-centrality and total-cost study");
    fairness->fallthrough();

    int binary_n = 0;
    CLI::App* binary = app.add_subcommand("binary", "two-price study with exhaustive oracle");
    binary->fallthrough();
    binary->add_option("--n", binary_n, "instance size (<= 22)");

    std::string network_path;
    double p_reg = 0.0, p_dsc = 0.0;
    int solve_trials = 500;
    std::string edges_csv;
    CLI::App* solve = app.add_subcommand("solve", "solve one network file and print outcomes");
    solve->fallthrough();
    solve->add_option("file", network_path, "network file")->required();
    solve->add_option("--p-reg", p_reg, "regular price for the two-price scenario");
    solve->add_option("--p-dsc", p_dsc, "discounted price for the two-price scenario");
    solve->add_option("--trials", solve_trials, "rounding trials");
    solve->add_option("--export-edges", edges_csv, "write the network's i,j,h_ij edge list");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(network_path, p_reg, p_dsc, solve_trials, g.seed, edges_csv);

        np::ExperimentKind kind = np::ExperimentKind::ProfitRatioSweepPA;
        if (sweep->parsed())
            kind = topology == "tree" ? np::ExperimentKind::ProfitRatioSweepTree
                                      : np::ExperimentKind::ProfitRatioSweepPA;
        else if (duopoly->parsed())
            kind = np::ExperimentKind::DuopolyProfitRatio;
        else if (fairness->parsed())
            kind = np::ExperimentKind::PriceVsCentrality;
        else if (binary->parsed())
            kind = np::ExperimentKind::BinaryPricingStudy;

        np::ExperimentConfig cfg = assemble_config(g, kind, overrides);
        // The subcommand decides the experiment; a config file fills the rest.
        // A config kind from the same family is kept (bare `sweep` honors the
        // config's sweep_tree; `fairness` honors total_cost_fairness).
        const bool same_family =
            (sweep->parsed() && sweep->count("--topology") == 0 &&
             (cfg.experiment == np::ExperimentKind::ProfitRatioSweepPA ||
              cfg.experiment == np::ExperimentKind::ProfitRatioSweepTree)) ||
            (fairness->parsed() &&
             (cfg.experiment == np::ExperimentKind::PriceVsCentrality ||
              cfg.experiment == np::ExperimentKind::TotalCostFairness));
        if (!same_family) cfg.experiment = kind;
        if (binary->parsed() && binary_n > 0) cfg.n = binary_n;
        return run_and_write(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
