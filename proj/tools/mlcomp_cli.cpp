#include "mlcomp/config.hpp"
#include "mlcomp/grid.hpp"
#include "mlcomp/theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mlcomp;

namespace {

std::vector<std::uint64_t> parse_counts(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
    return out;
}

template <class T>
std::size_t index_in_grid(std::vector<T>& grid, T value) {
    auto it = std::find(grid.begin(), grid.end(), value);
    if (it != grid.end()) return static_cast<std::size_t>(it - grid.begin());
    grid.push_back(value);
    return grid.size() - 1;
}

void print_summary(const GridResult& g) {
    std::cout << "cells: " << g.cells.size() << ", failed: "
              << std::count_if(g.cells.begin(), g.cells.end(), [](const auto& c) { return !c.ok; }) << '\n';
    for (const auto& a : g.aggregates) {
        std::cout << "budget=" << a.budget << " alpha=" << format_real(a.alpha) << " runs=" << a.runs
                  << " quality=" << format_real(a.overall_quality.mean) << " qoe=" << format_real(a.qoe.mean)
                  << " diversity=" << format_real(a.diversity.mean)
                  << " low_z=" << format_real(a.low_z_mass.mean) << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for competing machine-learning predictors"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run a single competition cell");
    std::uint64_t budget = 0;
    double alpha = 0.0;
    std::size_t repeat = 0;
    std::string log_path;
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--budget", budget, "Budget value n_b")->required();
    run->add_option("--alpha", alpha, "Selection sharpness")->required();
    run->add_option("--repeat", repeat, "Repeat index");
    run->add_option("--log", log_path, "Write one NDJSON record per round to this file");

    auto* grid = app.add_subcommand("grid", "Run the full budget x alpha x repeat grid");
    std::optional<std::size_t> workers;
    grid->add_option("--config", config_path, "Experiment config (JSON)")->required();
    grid->add_option("--out", out_dir, "Output directory");
    grid->add_option("--workers", workers, "Worker threads");
    grid->add_option("--seed", seed, "Override the base seed");

    auto* theory = app.add_subcommand("verify-theory", "Evaluate the variance condition for two Z distributions");
    std::size_t m = 0;
    double t_alpha = 1.0;
    std::string z1_text;
    std::string z2_text;
    std::uint64_t pairs = 0;
    std::uint64_t t_seed = 0;
    theory->add_option("--M", m, "Number of predictors")->required();
    theory->add_option("--alpha", t_alpha, "Selection sharpness");
    theory->add_option("--z1", z1_text, "Counts of Z = 0, 1/M, ..., 1 (comma separated)");
    theory->add_option("--z2", z2_text, "Counts for the second distribution");
    theory->add_option("--pairs", pairs, "Run a randomized soundness sweep over this many pairs");
    theory->add_option("--seed", t_seed, "Sweep seed");

    auto* report = app.add_subcommand("report", "Recompute aggregate.csv from raw.csv");
    std::string raw_path;
    report->add_option("--out", out_dir, "Output directory")->required();
    report->add_option("--raw", raw_path, "raw.csv to aggregate (default: <out>/raw.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run || *grid) {
            ExperimentConfig cfg = parse_config(config_path);
            if (seed) cfg.seed = *seed;
            if (out_dir.empty()) out_dir = cfg.output_dir;
            const SplitPair data = prepare_data(cfg);
            GridResult g;
            if (*run) {
                const CellKey key{index_in_grid(cfg.budget_grid, budget), index_in_grid(cfg.alpha_grid, alpha),
                                  repeat};
                std::ofstream log;
                RoundObserver obs;
                if (!log_path.empty()) {
                    log.open(log_path);
                    if (!log) throw std::runtime_error("cannot write " + log_path);
                    obs.on_round = [&](const MarketState&, const RoundRecord& r) { write_round_ndjson(log, r); };
                }
                g.dataset = cfg.name;
                g.n_predictors = cfg.n_predictors;
                CellResult c;
                c.key = key;
                c.budget = budget;
                c.alpha = alpha;
                c.seed = cell_seed(cfg.seed, key);
                try {
                    c = run_cell(cfg, data, key, obs);
                } catch (const std::exception& e) {
                    c.error = e.what();
                }
                g.cells.push_back(std::move(c));
                g.aggregates = aggregate(raw_rows(g));
            } else {
                if (workers) cfg.workers = *workers;
                g = run_grid(cfg, data, GridOptions{cfg.workers, {}});
            }
            emit_reports(g, out_dir);
            print_summary(g);
            for (const auto& c : g.cells) {
                if (!c.ok) std::cerr << "cell failed (budget=" << c.budget << ", alpha=" << c.alpha
                                     << ", repeat=" << c.key.repeat << "): " << c.error << '\n';
            }
            return g.all_ok() ? 0 : 1;
        }
        if (*theory) {
            if (pairs > 0) {
                const auto r = theorem1_soundness_sweep(m, pairs, t_seed);
                std::cout << "{\"n_predictors\": " << r.n_predictors << ", \"pairs\": " << r.pairs
                          << ", \"verdict_true\": " << r.verdict_true << ", \"violations\": " << r.violations
                          << ", \"statement_true\": " << r.statement_true
                          << ", \"false_with_decrease\": " << r.false_with_decrease
                          << ", \"false_with_increase\": " << r.false_with_increase << "}\n";
                return r.violations == 0 ? 0 : 1;
            }
            if (z1_text.empty() || z2_text.empty()) throw std::invalid_argument("--z1 and --z2 are required");
            auto s1 = DynamicsSummary::from_counts(m, t_alpha, parse_counts(z1_text));
            auto s2 = DynamicsSummary::from_counts(m, t_alpha, parse_counts(z2_text));
            if (s2.mu() < s1.mu()) std::swap(s1, s2);
            std::cout << theory_report_json(s1, s2) << '\n';
            return 0;
        }
        if (*report) {
            const fs::path raw = raw_path.empty() ? fs::path(out_dir) / "raw.csv" : fs::path(raw_path);
            const auto rows = read_raw_csv(raw);
            fs::create_directories(out_dir);
            write_aggregate_csv(fs::path(out_dir) / "aggregate.csv", aggregate(rows));
            std::cout << "aggregated " << rows.size() << " rows into " << (fs::path(out_dir) / "aggregate.csv")
                      << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
