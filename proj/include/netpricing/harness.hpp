#ifndef NETPRICING_HARNESS_HPP
#define NETPRICING_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "netpricing/monopoly.hpp"
#include "netpricing/network.hpp"

namespace netpricing {

enum class ExperimentKind {
    ProfitRatioSweepPA,
    ProfitRatioSweepTree,
    DuopolyProfitRatio,
    PriceVsCentrality,
    TotalCostFairness,
    BinaryPricingStudy,
};

const char* to_string(ExperimentKind k);

/// Batch experiment description. Replicate seeds derive from (seed, family
/// index, mu index, replicate), so runs are reproducible and parallelizable.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::ProfitRatioSweepPA;

    // topology ranges
    std::vector<double> mu_grid;      ///< influence values; default 0..1 step 0.1
    std::vector<double> pa_exponents; ///< PA degree exponents; default {2, 2.5, 3}
    std::vector<double> lambdas;      ///< tree branching parameters; default {1, 3, 5}
    int n = 0;           ///< 0: per-experiment default (500 sweeps, 50 fairness, 12 binary)
    int replicates = 0;  ///< 0: per-experiment default
    double beta = 2.0;   ///< utility curvature for PA consumers

    // scenario parameters
    double binary_deviation = 0.15;  ///< two-price spread around the uniform optimum
    int rounding_trials = 500;
    double duopoly_tol = 1e-6;
    int duopoly_max_rounds = 100;
    int duopoly_truncate_rounds = 3;
    PricingScenario duopoly_scenario = PricingScenario::Differentiated;

    // output
    std::string output_dir = ".";
    std::string format = "csv";  ///< "csv" or "json"
    bool plots = false;
    std::uint64_t seed = 0;
    int workers = 0;  ///< 0: hardware concurrency (NETPRICING_WORKERS overrides)

    void validate() const;
    void apply_defaults();  ///< fills empty grids with the per-experiment defaults
};

/// Flat table with pre-formatted cells; the unit of CSV/JSON output.
struct ResultTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Index of a named column; throws std::out_of_range when absent.
    int column(const std::string& name) const;
};

struct PlotSpec {
    enum class Kind { Line, Scatter };
    Kind kind = Kind::Line;
    std::string name;
    std::string title;
    std::vector<double> xs;
    std::vector<std::pair<std::string, std::vector<double>>> series;  // line charts
    std::vector<double> ys;                                           // scatter
};

struct ExperimentResult {
    std::vector<ResultTable> tables;
    std::vector<PlotSpec> plots;
    std::vector<std::string> failures;  ///< per-replicate errors; the sweep continues
};

ExperimentResult run_profit_ratio_sweep(const ExperimentConfig& cfg);
ExperimentResult run_duopoly_sweep(const ExperimentConfig& cfg);
ExperimentResult run_fairness_study(const ExperimentConfig& cfg);
ExperimentResult run_binary_study(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes every table in the configured format (plus SVG plots when enabled)
/// into cfg.output_dir; returns the paths written. Identical config and seed
/// produce byte-identical files.
std::vector<std::string> write_outputs(const ExperimentResult& result,
                                       const ExperimentConfig& cfg);

/// Influence-oriented Bonacich centrality B(G^T, Q^{-1}, 1): how much a
/// consumer's investment raises the rest of the network. The measure prices
/// and discounts are compared against.
Eigen::VectorXd influence_centrality(const ExternalityNetwork& net);

// --- config file -----------------------------------------------------------
// Plain "key = value" lines, '#' comments. Unknown keys are an error naming
// the offending key. Lists are comma-separated; mu_grid also accepts
// lo:hi:step. See the README for the schema.

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// --- small output helpers (shared with the CLI and tests) -------------------

std::string format_cell(double v);
void write_table_csv(const ResultTable& table, const std::string& path);
void write_table_json(const ResultTable& table, const std::string& path);

/// Minimal SVG polyline chart; one series per (label, ys) over shared xs.
void write_line_svg(const std::string& path, const std::string& title,
                    const std::vector<double>& xs,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series);

/// Minimal SVG scatter plot.
void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::vector<double>& xs, const std::vector<double>& ys);

int resolve_workers(int requested);

} // namespace netpricing

#endif
