#pragma once

#include "mlcomp/config.hpp"
#include "mlcomp/environment.hpp"
#include "mlcomp/metrics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mlcomp {

struct CellKey {
    std::size_t budget_index = 0;
    std::size_t alpha_index = 0;
    std::size_t repeat = 0;

    bool operator==(const CellKey&) const = default;
};

/// Injective in the cell coordinates for a fixed base seed.
std::uint64_t cell_seed(std::uint64_t base_seed, const CellKey& key);

struct CellResult {
    CellKey key;
    std::uint64_t budget = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    MetricReport report;
    std::vector<std::uint64_t> purchases;  // purchase-mode wins per predictor
    std::vector<std::uint64_t> initial_budgets;
    std::uint64_t rounds = 0;

    std::uint64_t total_purchases() const;
};

/// One raw CSV row; the aggregate is a pure function of these.
struct RawRow {
    std::string dataset;
    std::size_t n_predictors = 0;
    std::uint64_t budget = 0;
    double alpha = 0.0;
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    double overall_quality = 0.0;
    double qoe = 0.0;
    double diversity = 0.0;
    double low_z_mass = 0.0;
    std::size_t n_eval = 0;
    std::uint64_t purchases = 0;
};

struct MetricAggregate {
    double mean = 0.0;
    double sd = 0.0;    // sample standard deviation, 0 for a single run
    double band = 0.0;  // 2.58 * sd / sqrt(runs)
};

struct AggregateRow {
    std::uint64_t budget = 0;
    double alpha = 0.0;
    std::size_t runs = 0;
    MetricAggregate overall_quality;
    MetricAggregate qoe;
    MetricAggregate diversity;
    MetricAggregate low_z_mass;
};

struct GridResult {
    std::string dataset;
    std::size_t n_predictors = 0;
    std::vector<CellResult> cells;  // budget-major, then alpha, then repeat
    std::vector<AggregateRow> aggregates;

    bool all_ok() const;
};

struct GridOptions {
    std::size_t workers = 1;
    /// Optional per-cell hook; called from the worker that runs the cell.
    std::function<RoundObserver(const CellKey&)> observer_factory;
};

CompetitionConfig competition_config(const ExperimentConfig& cfg, std::uint64_t budget, double alpha,
                                     std::uint64_t seed);

CellResult run_cell(const ExperimentConfig& cfg, const SplitPair& data, const CellKey& key,
                    const RoundObserver& observer = {});

GridResult run_grid(const ExperimentConfig& cfg, const SplitPair& data, const GridOptions& options);
GridResult run_grid(const ExperimentConfig& cfg);

std::vector<RawRow> raw_rows(const GridResult& g);
std::vector<AggregateRow> aggregate(const std::vector<RawRow>& rows);

void write_raw_csv(const std::filesystem::path& path, const std::vector<RawRow>& rows);
std::vector<RawRow> read_raw_csv(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregateRow>& rows);

/// Writes raw.csv, aggregate.csv, errors.csv and per-cell
/// cells/cell_b<i>_a<j>_r<k>.json plus cells/hist_b<i>_a<j>_r<k>.csv.
void emit_reports(const GridResult& g, const std::filesystem::path& outdir);

/// Shortest round-trip formatting used by every CSV writer.
std::string format_real(double v);

}  // namespace mlcomp
