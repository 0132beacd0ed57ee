#include "mlcomp/grid.hpp"

#include "mlcomp/rng.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mlcomp {

namespace fs = std::filesystem;

std::uint64_t cell_seed(std::uint64_t base_seed, const CellKey& key) {
    return derive_seed(base_seed, {key.budget_index, key.alpha_index, key.repeat});
}

std::uint64_t CellResult::total_purchases() const {
    std::uint64_t s = 0;
    for (auto p : purchases) s += p;
    return s;
}

bool GridResult::all_ok() const {
    for (const auto& c : cells) {
        if (!c.ok) return false;
    }
    return true;
}

CompetitionConfig competition_config(const ExperimentConfig& cfg, std::uint64_t budget, double alpha,
                                     std::uint64_t seed) {
    CompetitionConfig cc;
    cc.alpha = alpha;
    cc.seed = seed;
    for (const auto& p : cfg.predictors) {
        PredictorConfig pc;
        pc.n_seed = p.n_seed;
        pc.budget = static_cast<std::uint64_t>(std::floor(static_cast<double>(budget) * p.budget_scale));
        pc.model.kind = p.kind;
        pc.model.hidden_nodes = p.hidden_nodes;
        pc.strategy = p.strategy;
        pc.train = p.train;
        cc.predictors.push_back(pc);
    }
    return cc;
}

namespace {

Dataset subsample(const Dataset& d, std::size_t count, std::uint64_t seed) {
    if (count == 0 || count >= d.size()) return d;
    return split(d, count, seed).evaluation;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& cfg, const SplitPair& data, const CellKey& key,
                    const RoundObserver& observer) {
    CellResult r;
    r.key = key;
    r.budget = cfg.budget_grid.at(key.budget_index);
    r.alpha = cfg.alpha_grid.at(key.alpha_index);
    r.seed = cell_seed(cfg.seed, key);
    r.rounds = cfg.rounds;

    auto cc = competition_config(cfg, r.budget, r.alpha, r.seed);
    for (auto& pc : cc.predictors) {
        pc.model.input_dim = data.competition.dim;
        pc.model.n_classes = data.competition.n_classes;
        r.initial_budgets.push_back(pc.budget);
    }
    const UserStream stream(data.competition, derive_seed(r.seed, {0}));
    const auto result = run_competition(cc, stream, cfg.rounds, observer);

    r.purchases.assign(cc.predictors.size(), 0);
    for (const auto& rec : result.history) {
        if (rec.mode == SelectionMode::purchase) ++r.purchases[rec.winner];
    }
    const Dataset eval = subsample(data.evaluation, cfg.eval_subsample, derive_seed(r.seed, {5}));
    EvaluationOptions opts;
    opts.alpha = r.alpha;
    opts.histogram_bins = cfg.histogram_bins;
    opts.sampled_qoe = cfg.sampled_qoe;
    opts.sample_seed = derive_seed(r.seed, {6});
    const auto models = models_of(result.market);
    r.report = evaluate(models, eval, QualityFunction::correctness(), opts);
    r.ok = true;
    return r;
}

GridResult run_grid(const ExperimentConfig& cfg, const SplitPair& data, const GridOptions& options) {
    GridResult g;
    g.dataset = cfg.name;
    g.n_predictors = cfg.n_predictors;
    for (std::size_t b = 0; b < cfg.budget_grid.size(); ++b) {
        for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                CellResult c;
                c.key = {b, a, r};
                c.budget = cfg.budget_grid[b];
                c.alpha = cfg.alpha_grid[a];
                c.seed = cell_seed(cfg.seed, c.key);
                g.cells.push_back(std::move(c));
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < g.cells.size(); i = next++) {
            const CellKey key = g.cells[i].key;
            try {
                const RoundObserver obs = options.observer_factory ? options.observer_factory(key) : RoundObserver{};
                g.cells[i] = run_cell(cfg, data, key, obs);
            } catch (const std::exception& e) {
                g.cells[i].ok = false;
                g.cells[i].error = e.what();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(options.workers, g.cells.size()));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    g.aggregates = aggregate(raw_rows(g));
    return g;
}

GridResult run_grid(const ExperimentConfig& cfg) {
    const SplitPair data = prepare_data(cfg);
    return run_grid(cfg, data, GridOptions{cfg.workers, {}});
}

std::vector<RawRow> raw_rows(const GridResult& g) {
    std::vector<RawRow> rows;
    for (const auto& c : g.cells) {
        if (!c.ok) continue;
        RawRow r;
        r.dataset = g.dataset;
        r.n_predictors = g.n_predictors;
        r.budget = c.budget;
        r.alpha = c.alpha;
        r.repeat = c.key.repeat;
        r.seed = c.seed;
        r.overall_quality = c.report.overall_quality;
        r.qoe = c.report.qoe;
        r.diversity = c.report.diversity;
        r.low_z_mass = c.report.low_z_mass;
        r.n_eval = c.report.n_eval;
        r.purchases = c.total_purchases();
        rows.push_back(r);
    }
    return rows;
}

namespace {

MetricAggregate summarize(const std::vector<double>& v) {
    MetricAggregate a;
    const double n = static_cast<double>(v.size());
    for (double x : v) a.mean += x;
    a.mean /= n;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - a.mean) * (x - a.mean);
        a.sd = std::sqrt(ss / (n - 1.0));
    }
    a.band = 2.58 * a.sd / std::sqrt(n);
    return a;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RawRow>& rows) {
    // Groups in order of first appearance of (budget, alpha).
    std::vector<std::pair<std::uint64_t, double>> keys;
    std::vector<std::vector<const RawRow*>> groups;
    for (const auto& r : rows) {
        std::size_t g = 0;
        while (g < keys.size() && !(keys[g].first == r.budget && keys[g].second == r.alpha)) ++g;
        if (g == keys.size()) {
            keys.emplace_back(r.budget, r.alpha);
            groups.emplace_back();
        }
        groups[g].push_back(&r);
    }
    std::vector<AggregateRow> out;
    for (std::size_t g = 0; g < keys.size(); ++g) {
        AggregateRow a;
        a.budget = keys[g].first;
        a.alpha = keys[g].second;
        a.runs = groups[g].size();
        auto collect = [&](double RawRow::*field) {
            std::vector<double> v;
            for (const RawRow* r : groups[g]) v.push_back(r->*field);
            return summarize(v);
        };
        a.overall_quality = collect(&RawRow::overall_quality);
        a.qoe = collect(&RawRow::qoe);
        a.diversity = collect(&RawRow::diversity);
        a.low_z_mass = collect(&RawRow::low_z_mass);
        out.push_back(a);
    }
    return out;
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

constexpr const char* kRawHeader =
    "dataset,n_predictors,budget,alpha,repeat,seed,overall_quality,qoe,diversity,low_z_mass,n_eval,purchases";
constexpr const char* kAggregateHeader =
    "budget,alpha,runs,"
    "overall_quality_mean,overall_quality_sd,overall_quality_band,"
    "qoe_mean,qoe_sd,qoe_band,"
    "diversity_mean,diversity_sd,diversity_band,"
    "low_z_mass_mean,low_z_mass_sd,low_z_mass_band";

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

std::string cell_stem(const CellKey& k) {
    return "b" + std::to_string(k.budget_index) + "_a" + std::to_string(k.alpha_index) + "_r" +
           std::to_string(k.repeat);
}

}  // namespace

void write_raw_csv(const fs::path& path, const std::vector<RawRow>& rows) {
    auto out = open_out(path);
    out << kRawHeader << '\n';
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.n_predictors << ',' << r.budget << ',' << format_real(r.alpha) << ','
            << r.repeat << ',' << r.seed << ',' << format_real(r.overall_quality) << ',' << format_real(r.qoe)
            << ',' << format_real(r.diversity) << ',' << format_real(r.low_z_mass) << ',' << r.n_eval << ','
            << r.purchases << '\n';
    }
}

std::vector<RawRow> read_raw_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kRawHeader) {
        throw std::runtime_error(path.string() + ": unexpected header");
    }
    std::vector<RawRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 12) throw std::runtime_error(path.string() + ": bad row at line " + std::to_string(line_no));
        RawRow r;
        r.dataset = c[0];
        r.n_predictors = std::stoull(c[1]);
        r.budget = std::stoull(c[2]);
        r.alpha = std::stod(c[3]);
        r.repeat = std::stoull(c[4]);
        r.seed = std::stoull(c[5]);
        r.overall_quality = std::stod(c[6]);
        r.qoe = std::stod(c[7]);
        r.diversity = std::stod(c[8]);
        r.low_z_mass = std::stod(c[9]);
        r.n_eval = std::stoull(c[10]);
        r.purchases = std::stoull(c[11]);
        rows.push_back(r);
    }
    return rows;
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows) {
    auto out = open_out(path);
    out << kAggregateHeader << '\n';
    for (const auto& a : rows) {
        out << a.budget << ',' << format_real(a.alpha) << ',' << a.runs;
        for (const auto* m : {&a.overall_quality, &a.qoe, &a.diversity, &a.low_z_mass}) {
            out << ',' << format_real(m->mean) << ',' << format_real(m->sd) << ',' << format_real(m->band);
        }
        out << '\n';
    }
}

void emit_reports(const GridResult& g, const fs::path& outdir) {
    fs::create_directories(outdir / "cells");
    const auto rows = raw_rows(g);
    write_raw_csv(outdir / "raw.csv", rows);
    write_aggregate_csv(outdir / "aggregate.csv", aggregate(rows));

    auto errors = open_out(outdir / "errors.csv");
    errors << "budget,alpha,repeat,seed,message\n";
    for (const auto& c : g.cells) {
        if (c.ok) {
            const auto stem = cell_stem(c.key);
            nlohmann::ordered_json j;
            j["budget"] = c.budget;
            j["alpha"] = c.alpha;
            j["repeat"] = c.key.repeat;
            j["seed"] = c.seed;
            j["class_quality"] = c.report.class_quality.matrix;
            j["class_quality_avg"] = c.report.class_quality.class_average;
            j["class_quality_centered"] = c.report.class_quality.centered;
            j["z_histogram"] = {{"edges", c.report.z_histogram.edges},
                                {"densities", c.report.z_histogram.densities}};
            j["purchases"] = c.purchases;
            auto jf = open_out(outdir / "cells" / ("cell_" + stem + ".json"));
            jf << j.dump(2) << '\n';

            auto hf = open_out(outdir / "cells" / ("hist_" + stem + ".csv"));
            hf << "bin_lo,bin_hi,density\n";
            const auto& h = c.report.z_histogram;
            for (std::size_t b = 0; b < h.densities.size(); ++b) {
                hf << format_real(h.edges[b]) << ',' << format_real(h.edges[b + 1]) << ','
                   << format_real(h.densities[b]) << '\n';
            }
        } else {
            std::string msg = c.error;
            for (auto& ch : msg) {
                if (ch == ',' || ch == '\n') ch = ' ';
            }
            errors << c.budget << ',' << format_real(c.alpha) << ',' << c.key.repeat << ',' << c.seed << ',' << msg
                   << '\n';
        }
    }
}

}  // namespace mlcomp
