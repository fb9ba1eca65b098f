#include "netpricing/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netpricing/binary.hpp"
#include "netpricing/equilibrium.hpp"
#include "netpricing/errors.hpp"
#include "netpricing/oligopoly.hpp"
#include "netpricing/rng.hpp"
#include "netpricing/stats.hpp"

namespace netpricing {

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ProfitRatioSweepPA: return "sweep_pa";
        case ExperimentKind::ProfitRatioSweepTree: return "sweep_tree";
        case ExperimentKind::DuopolyProfitRatio: return "duopoly";
        case ExperimentKind::PriceVsCentrality: return "price_vs_centrality";
        case ExperimentKind::TotalCostFairness: return "total_cost_fairness";
        case ExperimentKind::BinaryPricingStudy: return "binary_study";
    }
    return "?";
}

void ExperimentConfig::apply_defaults() {
    const bool fairness = experiment == ExperimentKind::PriceVsCentrality ||
                          experiment == ExperimentKind::TotalCostFairness;
    if (mu_grid.empty()) {
        if (fairness || experiment == ExperimentKind::BinaryPricingStudy) {
            mu_grid = {0.5};
        } else {
            for (int i = 0; i <= 10; ++i) mu_grid.push_back(0.1 * i);
        }
    }
    if (pa_exponents.empty())
        pa_exponents = (fairness || experiment == ExperimentKind::BinaryPricingStudy)
                           ? std::vector<double>{3.0}
                           : std::vector<double>{2.0, 2.5, 3.0};
    if (lambdas.empty())
        lambdas = fairness ? std::vector<double>{3.0} : std::vector<double>{1.0, 3.0, 5.0};
    if (n == 0) {
        switch (experiment) {
            case ExperimentKind::BinaryPricingStudy: n = 12; break;
            case ExperimentKind::PriceVsCentrality:
            case ExperimentKind::TotalCostFairness: n = 50; break;
            default: n = 500; break;
        }
    }
    if (replicates == 0) {
        switch (experiment) {
            case ExperimentKind::PriceVsCentrality:
            case ExperimentKind::TotalCostFairness: replicates = 5; break;
            case ExperimentKind::BinaryPricingStudy: replicates = 50; break;
            default: replicates = 50; break;
        }
    }
}

void ExperimentConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    for (double mu : mu_grid)
        if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("mu grid values must lie in [0, 1]");
    if (mu_grid.empty()) throw std::invalid_argument("mu grid is empty");
    if (format != "csv" && format != "json")
        throw std::invalid_argument("format must be csv or json");
    if (binary_deviation < 0.0 || binary_deviation >= 1.0)
        throw std::invalid_argument("binary deviation must lie in [0, 1)");
}

int resolve_workers(int requested) {
    if (const char* env = std::getenv("NETPRICING_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

std::string family_tag(ExperimentKind kind, bool tree, double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s_%s%g", to_string(kind), tree ? "lambda" : "exp", value);
    return buf;
}

} // namespace

std::string format_cell(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

int ResultTable::column(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == col) return static_cast<int>(i);
    throw std::out_of_range("table " + name + " has no column '" + col + "'");
}

Eigen::VectorXd influence_centrality(const ExternalityNetwork& net) {
    const Eigen::VectorXd qinv_diag = (0.5 / net.beta.array()).matrix();
    return bonacich(net.G.transpose(), qinv_diag, Eigen::VectorXd::Ones(net.n()));
}

// --- profit-ratio sweeps -----------------------------------------------------

namespace {

struct SweepCell {
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    int n = 0;
    double p0 = NAN, p1 = NAN, ratio = NAN;
    bool positive_definite = false;
    double lo_stmt = NAN, up_stmt = NAN, lo_proof = NAN, up_proof = NAN;
    bool brackets_stmt = false, brackets_proof = false;
};

ExternalityNetwork generate_for(const ExperimentConfig& cfg, bool tree, double family, double mu,
                                std::uint64_t seed) {
    TopologyConfig tc;
    tc.kind = tree ? TopologyKind::PoissonTree : TopologyKind::PreferentialAttachment;
    tc.n = cfg.n;
    tc.mu = mu;
    tc.seed = seed;
    if (tree) {
        tc.lambda = family;
    } else {
        tc.pa_exponent = family;
        tc.beta = cfg.beta;
    }
    return tree ? generate_poisson_tree(tc) : generate_pa(tc);
}

} // namespace

ExperimentResult run_profit_ratio_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool tree = cfg.experiment == ExperimentKind::ProfitRatioSweepTree;
    const std::vector<double>& families = tree ? cfg.lambdas : cfg.pa_exponents;
    const std::size_t n_mu = cfg.mu_grid.size();
    const std::size_t per_family = n_mu * cfg.replicates;
    const std::uint64_t base = derive_seed(cfg.seed, static_cast<int>(cfg.experiment));

    std::vector<SweepCell> cells(families.size() * per_family);
    parallel_for(cells.size(), resolve_workers(cfg.workers), [&](std::size_t t) {
        const std::size_t fi = t / per_family;
        const std::size_t mi = (t % per_family) / cfg.replicates;
        const std::size_t rep = t % cfg.replicates;
        SweepCell& cell = cells[t];
        cell.seed = derive_seed(base, fi, mi, rep);
        try {
            const ExternalityNetwork net =
                generate_for(cfg, tree, families[fi], cfg.mu_grid[mi], cell.seed);
            cell.n = net.n();
            const Profits pr = profits_p0_p1(net);
            cell.p0 = pr.p0;
            cell.p1 = pr.p1;
            cell.ratio = pr.p0 / pr.p1;
            try {
                const ProfitRatioReport rep_bounds = profit_ratio_bounds(net);
                cell.positive_definite = true;
                cell.lo_stmt = rep_bounds.theorem_statement.lower;
                cell.up_stmt = rep_bounds.theorem_statement.upper;
                cell.brackets_stmt = rep_bounds.theorem_statement.brackets;
                cell.lo_proof = rep_bounds.proof_form.lower;
                cell.up_proof = rep_bounds.proof_form.upper;
                cell.brackets_proof = rep_bounds.proof_form.brackets;
            } catch (const NotPositiveDefiniteError&) {
                cell.positive_definite = false;  // ratio still reported
            }
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    ExperimentResult out;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const std::string tag = family_tag(cfg.experiment, tree, families[fi]);

        ResultTable raw;
        raw.name = tag + "_replicates";
        raw.columns = {"experiment", "topology", tree ? "lambda" : "pa_exponent",
                       "mu", "replicate", "seed", "n", "p0", "p1", "ratio",
                       "positive_definite", "lower_stmt", "upper_stmt", "brackets_stmt",
                       "lower_proof", "upper_proof", "brackets_proof"};

        ResultTable summary;
        summary.name = tag;
        summary.columns = {"experiment",      "topology",        tree ? "lambda" : "pa_exponent",
                           "mu",              "mean_ratio",      "std_ratio",
                           "mean_lower_stmt", "mean_upper_stmt", "mean_gap_stmt",
                           "mean_lower_proof", "mean_upper_proof", "pd_count",
                           "replicate_count", "failure_count"};

        std::vector<double> plot_mu, plot_ratio, plot_lower;
        for (std::size_t mi = 0; mi < n_mu; ++mi) {
            std::vector<double> ratios, lo_s, up_s, lo_p, up_p, gaps;
            int pd_count = 0, failures = 0;
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                const SweepCell& cell = cells[fi * per_family + mi * cfg.replicates + rep];
                if (!cell.ok) {
                    ++failures;
                    out.failures.push_back(tag + " mu=" + format_cell(cfg.mu_grid[mi]) +
                                           " rep=" + std::to_string(rep) + ": " + cell.error);
                    continue;
                }
                raw.rows.push_back({to_string(cfg.experiment), tree ? "tree" : "pa",
                                    format_cell(families[fi]), format_cell(cfg.mu_grid[mi]),
                                    std::to_string(rep), std::to_string(cell.seed),
                                    std::to_string(cell.n), format_cell(cell.p0),
                                    format_cell(cell.p1), format_cell(cell.ratio),
                                    cell.positive_definite ? "1" : "0", format_cell(cell.lo_stmt),
                                    format_cell(cell.up_stmt), cell.brackets_stmt ? "1" : "0",
                                    format_cell(cell.lo_proof), format_cell(cell.up_proof),
                                    cell.brackets_proof ? "1" : "0"});
                ratios.push_back(cell.ratio);
                if (cell.positive_definite) {
                    ++pd_count;
                    lo_s.push_back(cell.lo_stmt);
                    up_s.push_back(cell.up_stmt);
                    lo_p.push_back(cell.lo_proof);
                    up_p.push_back(cell.up_proof);
                    gaps.push_back(cell.ratio - cell.lo_stmt);
                }
            }
            summary.rows.push_back(
                {to_string(cfg.experiment), tree ? "tree" : "pa", format_cell(families[fi]),
                 format_cell(cfg.mu_grid[mi]), format_cell(stats::mean(ratios)),
                 format_cell(stats::stdev(ratios)), format_cell(stats::mean(lo_s)),
                 format_cell(stats::mean(up_s)), format_cell(stats::mean(gaps)),
                 format_cell(stats::mean(lo_p)), format_cell(stats::mean(up_p)),
                 std::to_string(pd_count), std::to_string(static_cast<int>(ratios.size())),
                 std::to_string(failures)});
            plot_mu.push_back(cfg.mu_grid[mi]);
            plot_ratio.push_back(stats::mean(ratios));
            plot_lower.push_back(stats::mean(lo_s));
        }
        out.tables.push_back(std::move(summary));
        out.tables.push_back(std::move(raw));

        PlotSpec plot;
        plot.kind = PlotSpec::Kind::Line;
        plot.name = tag;
        plot.title = tag + " profit ratio vs influence value";
        plot.xs = plot_mu;
        plot.series = {{"mean_ratio", plot_ratio}, {"mean_lower_stmt", plot_lower}};
        out.plots.push_back(std::move(plot));
    }
    return out;
}

// --- duopoly sweep -----------------------------------------------------------

namespace {

struct DuopolyCell {
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    double ratio1_trunc = NAN, ratio2_trunc = NAN;
    double ratio1_conv = NAN, ratio2_conv = NAN;
    int rounds = 0;
    bool converged = false, oscillating = false;
    double final_gap = NAN;
};

} // namespace

ExperimentResult run_duopoly_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double>& families = cfg.pa_exponents;
    const std::size_t n_mu = cfg.mu_grid.size();
    const std::size_t per_family = n_mu * cfg.replicates;
    const std::uint64_t base = derive_seed(cfg.seed, static_cast<int>(cfg.experiment));

    std::vector<DuopolyCell> cells(families.size() * per_family);
    parallel_for(cells.size(), resolve_workers(cfg.workers), [&](std::size_t t) {
        const std::size_t fi = t / per_family;
        const std::size_t mi = (t % per_family) / cfg.replicates;
        const std::size_t rep = t % cfg.replicates;
        DuopolyCell& cell = cells[t];
        cell.seed = derive_seed(base, fi, mi, rep);
        try {
            const ExternalityNetwork net =
                generate_for(cfg, false, families[fi], cfg.mu_grid[mi], cell.seed);
            const std::vector<int> assignment = partition_consumers(
                net.n(), 2, PartitionScheme::RandomEqual, derive_seed(cell.seed, 0xa55));

            DuopolyParams params;
            params.scenario = cfg.duopoly_scenario;
            params.tol = cfg.duopoly_tol;
            params.binary_deviation = cfg.binary_deviation;
            params.rounding_trials = cfg.rounding_trials;
            params.seed = derive_seed(cell.seed, 0xd0);

            params.max_rounds = cfg.duopoly_truncate_rounds;
            const MarketRun truncated = run_market(net, assignment, params);
            params.max_rounds = cfg.duopoly_max_rounds;
            const MarketRun converged = run_market(net, assignment, params);

            cell.ratio1_trunc = truncated.trajectory.back().profit_ratios(0);
            cell.ratio2_trunc = truncated.trajectory.back().profit_ratios(1);
            cell.ratio1_conv = converged.trajectory.back().profit_ratios(0);
            cell.ratio2_conv = converged.trajectory.back().profit_ratios(1);
            cell.rounds = static_cast<int>(converged.trajectory.size());
            cell.converged = converged.converged;
            cell.oscillating = converged.oscillating;
            cell.final_gap = converged.final_gap;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    ExperimentResult out;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const std::string tag = family_tag(cfg.experiment, false, families[fi]);

        ResultTable raw;
        raw.name = tag + "_replicates";
        raw.columns = {"experiment", "pa_exponent", "mu", "replicate", "seed",
                       "ratio_sv1_truncated", "ratio_sv2_truncated", "ratio_sv1_converged",
                       "ratio_sv2_converged", "rounds", "converged", "oscillating", "final_gap"};

        ResultTable summary;
        summary.name = tag;
        summary.columns = {"experiment", "pa_exponent", "mu", "mean_ratio_sv1",
                           "mean_ratio_sv2", "mean_abs_diff_converged",
                           "mean_abs_diff_truncated", "convergence_rate", "mean_rounds",
                           "replicate_count", "failure_count"};

        std::vector<double> plot_mu, plot_r1, plot_r2;
        for (std::size_t mi = 0; mi < n_mu; ++mi) {
            std::vector<double> r1, r2, dc, dt, rounds;
            int converged_count = 0, failures = 0;
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                const DuopolyCell& cell = cells[fi * per_family + mi * cfg.replicates + rep];
                if (!cell.ok) {
                    ++failures;
                    out.failures.push_back(tag + " mu=" + format_cell(cfg.mu_grid[mi]) +
                                           " rep=" + std::to_string(rep) + ": " + cell.error);
                    continue;
                }
                raw.rows.push_back(
                    {to_string(cfg.experiment), format_cell(families[fi]),
                     format_cell(cfg.mu_grid[mi]), std::to_string(rep), std::to_string(cell.seed),
                     format_cell(cell.ratio1_trunc), format_cell(cell.ratio2_trunc),
                     format_cell(cell.ratio1_conv), format_cell(cell.ratio2_conv),
                     std::to_string(cell.rounds), cell.converged ? "1" : "0",
                     cell.oscillating ? "1" : "0", format_cell(cell.final_gap)});
                r1.push_back(cell.ratio1_conv);
                r2.push_back(cell.ratio2_conv);
                dc.push_back(std::abs(cell.ratio1_conv - cell.ratio2_conv));
                dt.push_back(std::abs(cell.ratio1_trunc - cell.ratio2_trunc));
                rounds.push_back(cell.rounds);
                if (cell.converged) ++converged_count;
            }
            const int count = static_cast<int>(r1.size());
            summary.rows.push_back(
                {to_string(cfg.experiment), format_cell(families[fi]),
                 format_cell(cfg.mu_grid[mi]), format_cell(stats::mean(r1)),
                 format_cell(stats::mean(r2)), format_cell(stats::mean(dc)),
                 format_cell(stats::mean(dt)),
                 format_cell(count > 0 ? static_cast<double>(converged_count) / count : 0.0),
                 format_cell(stats::mean(rounds)), std::to_string(count),
                 std::to_string(failures)});
            plot_mu.push_back(cfg.mu_grid[mi]);
            plot_r1.push_back(stats::mean(r1));
            plot_r2.push_back(stats::mean(r2));
        }
        out.tables.push_back(std::move(summary));
        out.tables.push_back(std::move(raw));

        PlotSpec plot;
        plot.kind = PlotSpec::Kind::Line;
        plot.name = tag;
        plot.title = tag + " per-vendor profit ratios";
        plot.xs = plot_mu;
        plot.series = {{"sv1", plot_r1}, {"sv2", plot_r2}};
        out.plots.push_back(std::move(plot));
    }
    return out;
}

// --- fairness study ----------------------------------------------------------

namespace {

struct FairnessCell {
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    int n = 0;
    double uniform_price = NAN;
    double spearman_price_centrality = NAN;
    double cv_price_diff = NAN, cv_cost_diff = NAN, cv_cost_unif = NAN, cv_cost_bin = NAN;
    double mean_centrality_discounted = NAN, mean_centrality_regular = NAN;
    double profit_diff = NAN, profit_unif = NAN, profit_bin = NAN;
    // per-consumer records
    std::vector<double> centrality, price_diff, inv_diff, price_bin, inv_bin, inv_unif;
};

} // namespace

ExperimentResult run_fairness_study(const ExperimentConfig& cfg) {
    cfg.validate();
    // Instance families: every PA exponent, then every tree lambda.
    struct Family {
        bool tree;
        double value;
    };
    std::vector<Family> families;
    for (double e : cfg.pa_exponents) families.push_back({false, e});
    for (double l : cfg.lambdas) families.push_back({true, l});

    const std::size_t n_mu = cfg.mu_grid.size();
    const std::size_t per_family = n_mu * cfg.replicates;
    const std::uint64_t base = derive_seed(cfg.seed, static_cast<int>(cfg.experiment));

    std::vector<FairnessCell> cells(families.size() * per_family);
    parallel_for(cells.size(), resolve_workers(cfg.workers), [&](std::size_t t) {
        const std::size_t fi = t / per_family;
        const std::size_t mi = (t % per_family) / cfg.replicates;
        const std::size_t rep = t % cfg.replicates;
        FairnessCell& cell = cells[t];
        cell.seed = derive_seed(base, fi, mi, rep);
        try {
            const ExternalityNetwork net = generate_for(cfg, families[fi].tree,
                                                        families[fi].value, cfg.mu_grid[mi],
                                                        cell.seed);
            cell.n = net.n();
            const PricingOutcome uniform = optimal_uniform_price(net);
            const DifferentiatedOutcome diff = optimal_differentiated_prices(net);
            cell.uniform_price = uniform.prices(0);
            const double p_reg = (1.0 + cfg.binary_deviation) * cell.uniform_price;
            const double p_dsc = (1.0 - cfg.binary_deviation) * cell.uniform_price;
            const BinaryPricingProblem prob(net, p_reg, p_dsc);
            const BinaryPipelineResult bin = binary_pricing_pipeline(
                prob, cfg.rounding_trials, derive_seed(cell.seed, 0xb1a), /*brute_cap=*/0);

            const Eigen::VectorXd centrality = influence_centrality(net);
            cell.profit_diff = diff.outcome.profit;
            cell.profit_unif = uniform.profit;
            cell.profit_bin = bin.outcome.profit;

            std::vector<double> cost_diff, cost_unif, cost_bin, price_diff_v, centrality_v;
            double cen_disc = 0.0, cen_reg = 0.0;
            int n_disc = 0, n_reg = 0;
            for (int i = 0; i < net.n(); ++i) {
                const double pd = diff.outcome.prices(i);
                const double xd = diff.outcome.investments.x(i);
                const double pu = uniform.prices(i);
                const double xu = uniform.investments.x(i);
                const double pb = bin.outcome.prices(i);
                const double xb = bin.outcome.investments.x(i);
                cell.centrality.push_back(centrality(i));
                cell.price_diff.push_back(pd);
                cell.inv_diff.push_back(xd);
                cell.price_bin.push_back(pb);
                cell.inv_bin.push_back(xb);
                cell.inv_unif.push_back(xu);
                price_diff_v.push_back(pd);
                centrality_v.push_back(centrality(i));
                cost_diff.push_back(pd * xd);
                cost_unif.push_back(pu * xu);
                cost_bin.push_back(pb * xb);
                if (bin.y(i) < 0) {
                    cen_disc += centrality(i);
                    ++n_disc;
                } else {
                    cen_reg += centrality(i);
                    ++n_reg;
                }
            }
            cell.spearman_price_centrality = stats::spearman(price_diff_v, centrality_v);
            cell.cv_price_diff = stats::coefficient_of_variation(price_diff_v);
            cell.cv_cost_diff = stats::coefficient_of_variation(cost_diff);
            cell.cv_cost_unif = stats::coefficient_of_variation(cost_unif);
            cell.cv_cost_bin = stats::coefficient_of_variation(cost_bin);
            cell.mean_centrality_discounted = n_disc > 0 ? cen_disc / n_disc : NAN;
            cell.mean_centrality_regular = n_reg > 0 ? cen_reg / n_reg : NAN;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    ExperimentResult out;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        const std::string tag =
            family_tag(cfg.experiment, families[fi].tree, families[fi].value);

        ResultTable consumers;
        consumers.name = tag + "_consumers";
        consumers.columns = {"experiment", "topology",
                             families[fi].tree ? "lambda" : "pa_exponent", "mu", "replicate",
                             "consumer", "centrality", "price_diff", "inv_diff", "cost_diff",
                             "price_unif", "inv_unif", "cost_unif", "price_bin", "inv_bin",
                             "cost_bin"};

        ResultTable summary;
        summary.name = tag;
        summary.columns = {"experiment", "topology",
                           families[fi].tree ? "lambda" : "pa_exponent", "mu", "replicate",
                           "seed", "n", "uniform_price", "spearman_price_centrality",
                           "cv_price_diff", "cv_cost_diff", "cv_cost_unif", "cv_cost_bin",
                           "mean_centrality_discounted", "mean_centrality_regular",
                           "profit_diff", "profit_unif", "profit_bin"};

        std::vector<double> scatter_x, scatter_y;
        for (std::size_t mi = 0; mi < n_mu; ++mi) {
            for (int rep = 0; rep < cfg.replicates; ++rep) {
                const FairnessCell& cell = cells[fi * per_family + mi * cfg.replicates + rep];
                if (!cell.ok) {
                    out.failures.push_back(tag + " mu=" + format_cell(cfg.mu_grid[mi]) +
                                           " rep=" + std::to_string(rep) + ": " + cell.error);
                    continue;
                }
                const double uniform_price = cell.uniform_price;
                for (std::size_t i = 0; i < cell.centrality.size(); ++i) {
                    consumers.rows.push_back(
                        {to_string(cfg.experiment), families[fi].tree ? "tree" : "pa",
                         format_cell(families[fi].value), format_cell(cfg.mu_grid[mi]),
                         std::to_string(rep), std::to_string(i),
                         format_cell(cell.centrality[i]), format_cell(cell.price_diff[i]),
                         format_cell(cell.inv_diff[i]),
                         format_cell(cell.price_diff[i] * cell.inv_diff[i]),
                         format_cell(uniform_price), format_cell(cell.inv_unif[i]),
                         format_cell(uniform_price * cell.inv_unif[i]),
                         format_cell(cell.price_bin[i]), format_cell(cell.inv_bin[i]),
                         format_cell(cell.price_bin[i] * cell.inv_bin[i])});
                    if (rep == 0 && mi == 0) {
                        scatter_x.push_back(cell.centrality[i]);
                        scatter_y.push_back(cell.price_diff[i]);
                    }
                }
                summary.rows.push_back(
                    {to_string(cfg.experiment), families[fi].tree ? "tree" : "pa",
                     format_cell(families[fi].value), format_cell(cfg.mu_grid[mi]),
                     std::to_string(rep), std::to_string(cell.seed), std::to_string(cell.n),
                     format_cell(cell.uniform_price),
                     format_cell(cell.spearman_price_centrality),
                     format_cell(cell.cv_price_diff), format_cell(cell.cv_cost_diff),
                     format_cell(cell.cv_cost_unif), format_cell(cell.cv_cost_bin),
                     format_cell(cell.mean_centrality_discounted),
                     format_cell(cell.mean_centrality_regular), format_cell(cell.profit_diff),
                     format_cell(cell.profit_unif), format_cell(cell.profit_bin)});
            }
        }
        out.tables.push_back(std::move(summary));
        out.tables.push_back(std::move(consumers));

        PlotSpec plot;
        plot.kind = PlotSpec::Kind::Scatter;
        plot.name = tag;
        plot.title = tag + " per-unit price vs centrality";
        plot.xs = scatter_x;
        plot.ys = scatter_y;
        out.plots.push_back(std::move(plot));
    }
    return out;
}

// --- binary pricing study ------------------------------------------------------

namespace {

struct BinaryCell {
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    double p_reg = NAN, p_dsc = NAN;
    double w_opt = NAN, w_alg = NAN, w_mean = NAN, w_stderr = NAN;
    double r = NAN, shift = NAN;
    double achieved_ratio = NAN;
    bool guarantee_r_ok = false, guarantee_shift_ok = false, alg_at_opt = false;
    double mean_centrality_discounted = NAN, mean_centrality_regular = NAN;
};

} // namespace

ExperimentResult run_binary_study(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.n > 22)
        throw std::invalid_argument("binary study needs n <= 22 for the exhaustive oracle");
    const double exponent = cfg.pa_exponents.front();
    const double mu = cfg.mu_grid.front();
    const std::uint64_t base = derive_seed(cfg.seed, static_cast<int>(cfg.experiment));

    std::vector<BinaryCell> cells(cfg.replicates);
    parallel_for(cells.size(), resolve_workers(cfg.workers), [&](std::size_t rep) {
        BinaryCell& cell = cells[rep];
        cell.seed = derive_seed(base, 0, 0, rep);
        try {
            const ExternalityNetwork net = generate_for(cfg, false, exponent, mu, cell.seed);
            const PricingOutcome uniform = optimal_uniform_price(net);
            cell.p_reg = (1.0 + cfg.binary_deviation) * uniform.prices(0);
            cell.p_dsc = (1.0 - cfg.binary_deviation) * uniform.prices(0);
            const BinaryPricingProblem prob(net, cell.p_reg, cell.p_dsc);
            const BinaryPipelineResult res = binary_pricing_pipeline(
                prob, cfg.rounding_trials, derive_seed(cell.seed, 0x81), /*brute_cap=*/22);
            cell.w_alg = res.w_alg;
            cell.w_mean = res.w_mean;
            cell.w_stderr = res.w_stderr;
            cell.r = res.r_constant;
            cell.shift = res.guarantee_shift;
            cell.w_opt = *res.w_opt;
            cell.achieved_ratio = *res.achieved_ratio;
            cell.guarantee_r_ok = cell.w_mean + cell.r >=
                                  0.878 * (cell.w_opt + cell.r) - 3.0 * cell.w_stderr;
            cell.guarantee_shift_ok =
                cell.w_mean + cell.shift >=
                0.878 * (cell.w_opt + cell.shift) - 3.0 * cell.w_stderr;
            cell.alg_at_opt = cell.w_alg >= cell.w_opt - 1e-9;

            const Eigen::VectorXd centrality = influence_centrality(net);
            double cen_disc = 0.0, cen_reg = 0.0;
            int n_disc = 0, n_reg = 0;
            for (int i = 0; i < net.n(); ++i) {
                if (res.y(i) < 0) {
                    cen_disc += centrality(i);
                    ++n_disc;
                } else {
                    cen_reg += centrality(i);
                    ++n_reg;
                }
            }
            cell.mean_centrality_discounted = n_disc > 0 ? cen_disc / n_disc : NAN;
            cell.mean_centrality_regular = n_reg > 0 ? cen_reg / n_reg : NAN;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });

    ExperimentResult out;
    ResultTable raw;
    raw.name = "binary_study_replicates";
    raw.columns = {"experiment", "replicate", "seed", "n", "p_reg", "p_dsc", "w_opt", "w_alg",
                   "w_mean", "w_stderr", "r", "guarantee_shift", "achieved_ratio",
                   "guarantee_r_ok", "guarantee_shift_ok", "alg_at_opt",
                   "mean_centrality_discounted", "mean_centrality_regular"};
    std::vector<double> ratios;
    int r_count = 0, shift_count = 0, opt_count = 0, ok_count = 0;
    for (std::size_t rep = 0; rep < cells.size(); ++rep) {
        const BinaryCell& cell = cells[rep];
        if (!cell.ok) {
            out.failures.push_back("binary_study rep=" + std::to_string(rep) + ": " + cell.error);
            continue;
        }
        ++ok_count;
        raw.rows.push_back({to_string(cfg.experiment), std::to_string(rep),
                            std::to_string(cell.seed), std::to_string(cfg.n),
                            format_cell(cell.p_reg), format_cell(cell.p_dsc),
                            format_cell(cell.w_opt), format_cell(cell.w_alg),
                            format_cell(cell.w_mean), format_cell(cell.w_stderr),
                            format_cell(cell.r), format_cell(cell.shift),
                            format_cell(cell.achieved_ratio), cell.guarantee_r_ok ? "1" : "0",
                            cell.guarantee_shift_ok ? "1" : "0", cell.alg_at_opt ? "1" : "0",
                            format_cell(cell.mean_centrality_discounted),
                            format_cell(cell.mean_centrality_regular)});
        ratios.push_back(cell.achieved_ratio);
        if (cell.guarantee_r_ok) ++r_count;
        if (cell.guarantee_shift_ok) ++shift_count;
        if (cell.alg_at_opt) ++opt_count;
    }
    ResultTable summary;
    summary.name = "binary_study";
    summary.columns = {"experiment",         "n",
                       "replicate_count",    "mean_achieved_ratio",
                       "min_achieved_ratio", "guarantee_r_rate",
                       "guarantee_shift_rate", "exact_optimum_rate",
                       "failure_count"};
    summary.rows.push_back(
        {to_string(cfg.experiment), std::to_string(cfg.n), std::to_string(ok_count),
         format_cell(stats::mean(ratios)),
         format_cell(ratios.empty() ? NAN : *std::min_element(ratios.begin(), ratios.end())),
         format_cell(ok_count > 0 ? static_cast<double>(r_count) / ok_count : 0.0),
         format_cell(ok_count > 0 ? static_cast<double>(shift_count) / ok_count : 0.0),
         format_cell(ok_count > 0 ? static_cast<double>(opt_count) / ok_count : 0.0),
         std::to_string(static_cast<int>(out.failures.size()))});
    out.tables.push_back(std::move(summary));
    out.tables.push_back(std::move(raw));
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
        case ExperimentKind::ProfitRatioSweepPA:
        case ExperimentKind::ProfitRatioSweepTree: return run_profit_ratio_sweep(cfg);
        case ExperimentKind::DuopolyProfitRatio: return run_duopoly_sweep(cfg);
        case ExperimentKind::PriceVsCentrality:
        case ExperimentKind::TotalCostFairness: return run_fairness_study(cfg);
        case ExperimentKind::BinaryPricingStudy: return run_binary_study(cfg);
    }
    throw std::invalid_argument("unknown experiment");
}

// --- output ------------------------------------------------------------------

void write_table_csv(const ResultTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) f << ',';
        f << table.columns[c];
    }
    f << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) f << ',';
            f << row[c];
        }
        f << '\n';
    }
}

namespace {

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(v);  // nan/inf stay quoted
}

} // namespace

void write_table_json(const ResultTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << "[\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        f << "  {";
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) f << ", ";
            f << '"' << table.columns[c] << "\": ";
            const std::string& cell = table.rows[r][c];
            if (looks_numeric(cell))
                f << cell;
            else
                f << '"' << cell << '"';
        }
        f << (r + 1 < table.rows.size() ? "},\n" : "}\n");
    }
    f << "]\n";
}

namespace {

struct SvgFrame {
    double x0, x1, y0, y1;  // data ranges
    static constexpr int W = 640, H = 420, ML = 60, MR = 20, MT = 40, MB = 50;

    double px(double x) const {
        const double span = x1 > x0 ? x1 - x0 : 1.0;
        return ML + (x - x0) / span * (W - ML - MR);
    }
    double py(double y) const {
        const double span = y1 > y0 ? y1 - y0 : 1.0;
        return H - MB - (y - y0) / span * (H - MT - MB);
    }
};

void svg_header(std::ofstream& f, const std::string& title) {
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << SvgFrame::W << "\" height=\""
      << SvgFrame::H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << SvgFrame::W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
}

void svg_axes(std::ofstream& f, const SvgFrame& fr) {
    f << "<line x1=\"" << SvgFrame::ML << "\" y1=\"" << SvgFrame::H - SvgFrame::MB << "\" x2=\""
      << SvgFrame::W - SvgFrame::MR << "\" y2=\"" << SvgFrame::H - SvgFrame::MB
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << SvgFrame::ML << "\" y1=\"" << SvgFrame::MT << "\" x2=\"" << SvgFrame::ML
      << "\" y2=\"" << SvgFrame::H - SvgFrame::MB << "\" stroke=\"black\"/>\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", fr.x0);
    f << "<text x=\"" << SvgFrame::ML << "\" y=\"" << SvgFrame::H - SvgFrame::MB + 18
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", fr.x1);
    f << "<text x=\"" << SvgFrame::W - SvgFrame::MR - 20 << "\" y=\""
      << SvgFrame::H - SvgFrame::MB + 18 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", fr.y0);
    f << "<text x=\"4\" y=\"" << SvgFrame::H - SvgFrame::MB
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", fr.y1);
    f << "<text x=\"4\" y=\"" << SvgFrame::MT + 8
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
}

} // namespace

void write_line_svg(const std::string& path, const std::string& title,
                    const std::vector<double>& xs,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    SvgFrame fr{0, 1, 0, 1};
    if (!xs.empty()) {
        fr.x0 = *std::min_element(xs.begin(), xs.end());
        fr.x1 = *std::max_element(xs.begin(), xs.end());
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& [name, ys] : series)
            for (double y : ys)
                if (std::isfinite(y)) {
                    lo = std::min(lo, y);
                    hi = std::max(hi, y);
                }
        if (std::isfinite(lo)) {
            fr.y0 = lo;
            fr.y1 = hi > lo ? hi : lo + 1.0;
        }
    }
    svg_header(f, title);
    svg_axes(f, fr);
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    int si = 0;
    for (const auto& [name, ys] : series) {
        const char* color = colors[si % 4];
        f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
            if (!std::isfinite(ys[i])) continue;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", fr.px(xs[i]), fr.py(ys[i]));
            f << buf;
        }
        f << "\"/>\n";
        f << "<text x=\"" << SvgFrame::W - SvgFrame::MR - 150 << "\" y=\""
          << SvgFrame::MT + 14 * (si + 1) << "\" font-family=\"sans-serif\" font-size=\"11\" "
          << "fill=\"" << color << "\">" << name << "</text>\n";
        ++si;
    }
    f << "</svg>\n";
}

void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::vector<double>& xs, const std::vector<double>& ys) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    SvgFrame fr{0, 1, 0, 1};
    if (!xs.empty()) {
        fr.x0 = *std::min_element(xs.begin(), xs.end());
        fr.x1 = *std::max_element(xs.begin(), xs.end());
        fr.y0 = *std::min_element(ys.begin(), ys.end());
        fr.y1 = *std::max_element(ys.begin(), ys.end());
        if (fr.x1 <= fr.x0) fr.x1 = fr.x0 + 1.0;
        if (fr.y1 <= fr.y0) fr.y1 = fr.y0 + 1.0;
    }
    svg_header(f, title);
    svg_axes(f, fr);
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"#1f77b4\"/>\n",
                      fr.px(xs[i]), fr.py(ys[i]));
        f << buf;
    }
    f << "</svg>\n";
}

std::vector<std::string> write_outputs(const ExperimentResult& result,
                                       const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    std::vector<std::string> written;
    for (const ResultTable& table : result.tables) {
        const std::string path =
            (fs::path(cfg.output_dir) / (table.name + "." + cfg.format)).string();
        if (cfg.format == "csv")
            write_table_csv(table, path);
        else
            write_table_json(table, path);
        written.push_back(path);
    }
    if (cfg.plots) {
        for (const PlotSpec& plot : result.plots) {
            const std::string path =
                (fs::path(cfg.output_dir) / (plot.name + ".svg")).string();
            if (plot.kind == PlotSpec::Kind::Line)
                write_line_svg(path, plot.title, plot.xs, plot.series);
            else
                write_scatter_svg(path, plot.title, plot.xs, plot.ys);
            written.push_back(path);
        }
    }
    return written;
}

// --- config file -------------------------------------------------------------

namespace {

std::vector<double> parse_number_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    // lo:hi:step range form
    if (value.find(':') != std::string::npos) {
        double lo, hi, step;
        if (std::sscanf(value.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
            throw std::invalid_argument("config key '" + key + "': bad range '" + value + "'");
        for (double x = lo; x <= hi + 1e-12; x += step) out.push_back(std::min(x, hi));
        return out;
    }
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (...) {
            throw std::invalid_argument("config key '" + key + "': bad number '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument("config key '" + key + "': empty list");
    return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument("config key '" + key + "': expected true/false");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "experiment") {
        if (value == "sweep_pa") cfg.experiment = ExperimentKind::ProfitRatioSweepPA;
        else if (value == "sweep_tree") cfg.experiment = ExperimentKind::ProfitRatioSweepTree;
        else if (value == "duopoly") cfg.experiment = ExperimentKind::DuopolyProfitRatio;
        else if (value == "fairness" || value == "price_vs_centrality")
            cfg.experiment = ExperimentKind::PriceVsCentrality;
        else if (value == "total_cost_fairness")
            cfg.experiment = ExperimentKind::TotalCostFairness;
        else if (value == "binary") cfg.experiment = ExperimentKind::BinaryPricingStudy;
        else throw std::invalid_argument("config key 'experiment': unknown value '" + value + "'");
    } else if (key == "mu_grid" || key == "mu") {
        cfg.mu_grid = parse_number_list(value, key);
    } else if (key == "exponents" || key == "pa_exponents") {
        cfg.pa_exponents = parse_number_list(value, key);
    } else if (key == "lambdas") {
        cfg.lambdas = parse_number_list(value, key);
    } else if (key == "n") {
        cfg.n = std::stoi(value);
    } else if (key == "replicates") {
        cfg.replicates = std::stoi(value);
    } else if (key == "beta") {
        cfg.beta = std::stod(value);
    } else if (key == "deviation" || key == "binary_deviation") {
        cfg.binary_deviation = std::stod(value);
    } else if (key == "trials" || key == "rounding_trials") {
        cfg.rounding_trials = std::stoi(value);
    } else if (key == "duopoly_tol") {
        cfg.duopoly_tol = std::stod(value);
    } else if (key == "duopoly_max_rounds") {
        cfg.duopoly_max_rounds = std::stoi(value);
    } else if (key == "truncate_rounds") {
        cfg.duopoly_truncate_rounds = std::stoi(value);
    } else if (key == "duopoly_scenario") {
        if (value == "uniform") cfg.duopoly_scenario = PricingScenario::Uniform;
        else if (value == "binary") cfg.duopoly_scenario = PricingScenario::Binary;
        else if (value == "differentiated")
            cfg.duopoly_scenario = PricingScenario::Differentiated;
        else throw std::invalid_argument("config key 'duopoly_scenario': unknown value");
    } else if (key == "out" || key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "format") {
        cfg.format = value;
    } else if (key == "plots") {
        cfg.plots = parse_bool(value, key);
    } else if (key == "seed") {
        cfg.seed = std::stoull(value);
    } else if (key == "workers") {
        cfg.workers = std::stoi(value);
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace netpricing
