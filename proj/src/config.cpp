#include "mlcomp/config.hpp"

#include "mlcomp/rng.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mlcomp {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& key, const std::string& msg) {
    throw std::invalid_argument(origin + ": " + (key.empty() ? "" : "'" + key + "': ") + msg);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& origin,
                    const std::string& path) {
    if (!obj.is_object()) fail(origin, path, "expected an object");
    for (const auto& [k, _] : obj.items()) {
        if (!allowed.contains(k)) fail(origin, path.empty() ? k : path + "." + k, "unknown key");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& origin, const std::string& path) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(origin, path.empty() ? key : path + "." + key, std::string("wrong type (") + e.what() + ")");
    }
}

void read_model(const json& j, PredictorTemplate& p, const std::string& origin, const std::string& path) {
    reject_unknown(j, {"kind", "hidden_nodes"}, origin, path);
    if (j.contains("kind")) {
        std::string kind;
        read(j, "kind", kind, origin, path);
        if (kind == "logistic") {
            p.kind = ModelKind::logistic;
        } else if (kind == "one_hidden_layer") {
            p.kind = ModelKind::one_hidden_layer;
        } else {
            fail(origin, path + ".kind", "expected 'logistic' or 'one_hidden_layer'");
        }
    }
    read(j, "hidden_nodes", p.hidden_nodes, origin, path);
}

void read_strategy(const json& j, PredictorTemplate& p, const std::string& origin, const std::string& path) {
    reject_unknown(j, {"type", "c_ent"}, origin, path);
    if (j.contains("type") && j.at("type") != "entropy") fail(origin, path + ".type", "only 'entropy' is supported");
    read(j, "c_ent", p.strategy.threshold_fraction, origin, path);
}

void read_train(const json& j, PredictorTemplate& p, const std::string& origin, const std::string& path) {
    reject_unknown(j,
                   {"epochs", "learning_rate", "batch_size", "retrain_period", "adam_beta1", "adam_beta2",
                    "adam_epsilon", "cold_retrain"},
                   origin, path);
    auto& t = p.train;
    read(j, "epochs", t.epochs, origin, path);
    read(j, "learning_rate", t.learning_rate, origin, path);
    read(j, "batch_size", t.batch_size, origin, path);
    read(j, "retrain_period", t.retrain_period, origin, path);
    read(j, "adam_beta1", t.adam_beta1, origin, path);
    read(j, "adam_beta2", t.adam_beta2, origin, path);
    read(j, "adam_epsilon", t.adam_epsilon, origin, path);
    read(j, "cold_retrain", t.cold_retrain, origin, path);
}

void read_predictor(const json& j, PredictorTemplate& p, const std::string& origin, const std::string& path) {
    reject_unknown(j, {"n_seed", "budget_scale", "model", "strategy", "train"}, origin, path);
    read(j, "n_seed", p.n_seed, origin, path);
    read(j, "budget_scale", p.budget_scale, origin, path);
    if (j.contains("model")) read_model(j.at("model"), p, origin, path + ".model");
    if (j.contains("strategy")) read_strategy(j.at("strategy"), p, origin, path + ".strategy");
    if (j.contains("train")) read_train(j.at("train"), p, origin, path + ".train");
}

void validate_predictor(const PredictorTemplate& p, const std::string& origin, const std::string& path) {
    try {
        if (p.n_seed < 1) throw std::invalid_argument("n_seed must be >= 1");
        if (!(p.budget_scale >= 0.0)) throw std::invalid_argument("budget_scale must be >= 0");
        if (p.kind == ModelKind::one_hidden_layer && p.hidden_nodes < 1) {
            throw std::invalid_argument("hidden_nodes must be >= 1 for one_hidden_layer");
        }
        p.strategy.validate();
        p.train.validate();
    } catch (const std::invalid_argument& e) {
        fail(origin, path, e.what());
    }
}

void read_dataset(const json& j, DatasetConfig& d, const std::string& origin) {
    reject_unknown(j, {"synthetic", "csv", "standardize", "label_noise", "eval_count"}, origin, "dataset");
    if (j.contains("synthetic") == j.contains("csv")) {
        fail(origin, "dataset", "exactly one of 'synthetic' or 'csv' is required");
    }
    if (j.contains("synthetic")) {
        d.source = DatasetConfig::Source::synthetic;
        const auto& s = j.at("synthetic");
        const std::string p = "dataset.synthetic";
        reject_unknown(s, {"n_classes", "dim", "means", "cov_scale", "n", "seed"}, origin, p);
        for (const char* key : {"n_classes", "dim", "means", "n"}) {
            if (!s.contains(key)) fail(origin, p + "." + key, "required");
        }
        read(s, "n_classes", d.synthetic.n_classes, origin, p);
        read(s, "dim", d.synthetic.dim, origin, p);
        read(s, "means", d.synthetic.means, origin, p);
        read(s, "cov_scale", d.synthetic.cov_scale, origin, p);
        read(s, "n", d.synthetic.n, origin, p);
        read(s, "seed", d.synthetic.seed, origin, p);
        if (d.synthetic.means.size() != d.synthetic.n_classes) fail(origin, p + ".means", "need one mean per class");
        for (const auto& m : d.synthetic.means) {
            if (m.size() != d.synthetic.dim) fail(origin, p + ".means", "mean length must equal dim");
        }
    } else {
        d.source = DatasetConfig::Source::csv;
        const auto& c = j.at("csv");
        const std::string p = "dataset.csv";
        reject_unknown(c, {"path", "eval_path", "label_column", "header"}, origin, p);
        if (!c.contains("path")) fail(origin, p + ".path", "required");
        read(c, "path", d.csv_path, origin, p);
        read(c, "eval_path", d.eval_csv_path, origin, p);
        read(c, "header", d.csv.has_header, origin, p);
        if (c.contains("label_column")) {
            const auto& lc = c.at("label_column");
            if (lc.is_string()) {
                d.csv.label_column = lc.get<std::string>();
            } else if (lc.is_number_unsigned()) {
                d.csv.label_column = lc.get<std::size_t>();
            } else {
                fail(origin, p + ".label_column", "expected a column name or a zero-based index");
            }
        }
    }
    read(j, "standardize", d.standardize, origin, "dataset");
    read(j, "label_noise", d.label_noise, origin, "dataset");
    read(j, "eval_count", d.eval_count, origin, "dataset");
    if (!(d.label_noise >= 0.0 && d.label_noise <= 1.0)) fail(origin, "dataset.label_noise", "must be in [0, 1]");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    reject_unknown(root,
                   {"name", "dataset", "rounds", "predictors", "defaults", "overrides", "alpha_grid", "budget_grid",
                    "repeats", "seed", "eval_subsample", "histogram_bins", "qoe", "workers", "output_dir"},
                   origin, "");
    ExperimentConfig cfg;
    read(root, "name", cfg.name, origin, "");
    if (!root.contains("dataset")) fail(origin, "dataset", "required");
    read_dataset(root.at("dataset"), cfg.dataset, origin);
    read(root, "rounds", cfg.rounds, origin, "");
    read(root, "predictors", cfg.n_predictors, origin, "");
    read(root, "alpha_grid", cfg.alpha_grid, origin, "");
    read(root, "budget_grid", cfg.budget_grid, origin, "");
    read(root, "repeats", cfg.repeats, origin, "");
    read(root, "seed", cfg.seed, origin, "");
    read(root, "eval_subsample", cfg.eval_subsample, origin, "");
    read(root, "histogram_bins", cfg.histogram_bins, origin, "");
    read(root, "workers", cfg.workers, origin, "");
    read(root, "output_dir", cfg.output_dir, origin, "");
    if (root.contains("qoe")) {
        std::string mode;
        read(root, "qoe", mode, origin, "");
        if (mode == "sampled") {
            cfg.sampled_qoe = true;
        } else if (mode != "exact") {
            fail(origin, "qoe", "expected 'exact' or 'sampled'");
        }
    }

    if (cfg.n_predictors < 2) fail(origin, "predictors", "need at least two predictors");
    if (cfg.alpha_grid.empty()) fail(origin, "alpha_grid", "must be non-empty");
    for (double a : cfg.alpha_grid) {
        if (!(a >= 0.0)) fail(origin, "alpha_grid", "alpha must be >= 0");
    }
    if (cfg.budget_grid.empty()) fail(origin, "budget_grid", "must be non-empty");
    if (cfg.repeats < 1) fail(origin, "repeats", "must be >= 1");
    if (cfg.histogram_bins < 1) fail(origin, "histogram_bins", "must be >= 1");
    if (cfg.workers < 1) fail(origin, "workers", "must be >= 1");

    PredictorTemplate base;
    if (root.contains("defaults")) read_predictor(root.at("defaults"), base, origin, "defaults");
    cfg.predictors.assign(cfg.n_predictors, base);
    if (root.contains("overrides")) {
        const auto& ov = root.at("overrides");
        if (!ov.is_array()) fail(origin, "overrides", "expected an array");
        if (ov.size() != cfg.n_predictors) {
            fail(origin, "overrides",
                 "has " + std::to_string(ov.size()) + " entries, expected " + std::to_string(cfg.n_predictors));
        }
        for (std::size_t i = 0; i < ov.size(); ++i) {
            read_predictor(ov[i], cfg.predictors[i], origin, "overrides[" + std::to_string(i) + "]");
        }
    }
    for (std::size_t i = 0; i < cfg.predictors.size(); ++i) {
        validate_predictor(cfg.predictors[i], origin, "predictor " + std::to_string(i));
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config_text(ss.str(), path);
    // Relative data paths are resolved against the config file's directory.
    const auto base = std::filesystem::path(path).parent_path();
    for (auto* p : {&cfg.dataset.csv_path, &cfg.dataset.eval_csv_path}) {
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
    }
    return cfg;
}

SplitPair prepare_data(const ExperimentConfig& cfg) {
    const auto& dc = cfg.dataset;
    auto add_noise = [&](const Dataset& d, std::uint64_t tag) {
        return inject_label_noise(d, {dc.label_noise, derive_seed(cfg.seed, {10, tag})});
    };
    if (dc.source == DatasetConfig::Source::csv && !dc.eval_csv_path.empty()) {
        SplitPair sp{load_csv(dc.csv_path, dc.csv), load_csv(dc.eval_csv_path, dc.csv)};
        if (sp.competition.dim != sp.evaluation.dim) {
            throw std::runtime_error("prepare_data: competition and evaluation files differ in dimension");
        }
        sp.evaluation = remap_labels(sp.evaluation, sp.competition.label_names);
        if (dc.standardize) {
            sp.evaluation = standardize(sp.evaluation, sp.competition);
            sp.competition = standardize(sp.competition);
        }
        sp.competition = add_noise(sp.competition, 0);
        sp.evaluation = add_noise(sp.evaluation, 1);
        return sp;
    }
    Dataset d = dc.source == DatasetConfig::Source::csv ? load_csv(dc.csv_path, dc.csv)
                                                        : synth_gaussian_mixture(dc.synthetic);
    d.validate();
    if (dc.standardize) d = standardize(d);
    return split(add_noise(d, 0), dc.eval_count, derive_seed(cfg.seed, {11}));
}

}  // namespace mlcomp
