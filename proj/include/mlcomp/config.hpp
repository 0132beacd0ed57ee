#pragma once

#include "mlcomp/dataset.hpp"
#include "mlcomp/models.hpp"
#include "mlcomp/strategy.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mlcomp {

struct DatasetConfig {
    enum class Source { synthetic, csv };
    Source source = Source::synthetic;
    GaussianMixtureSpec synthetic;
    std::string csv_path;
    std::string eval_csv_path;  // optional pre-split evaluation file
    CsvOptions csv;
    bool standardize = false;
    double label_noise = 0.3;
    std::size_t eval_count = 5000;
};

/// Fully resolved settings for one predictor slot.
struct PredictorTemplate {
    std::size_t n_seed = 100;
    double budget_scale = 1.0;  // budget = floor(grid value * budget_scale)
    ModelKind kind = ModelKind::logistic;
    std::size_t hidden_nodes = 0;
    BuyingStrategy strategy;
    TrainConfig train;
};

struct ExperimentConfig {
    std::string name = "experiment";
    DatasetConfig dataset;
    std::uint64_t rounds = 10000;
    std::size_t n_predictors = 18;
    std::vector<PredictorTemplate> predictors;  // length n_predictors
    std::vector<double> alpha_grid{0.0, 1.0, 2.0, 4.0};
    std::vector<std::uint64_t> budget_grid{0, 100, 200, 400};
    std::size_t repeats = 30;
    std::uint64_t seed = 0;
    std::size_t eval_subsample = 0;  // 0 = whole evaluation set
    std::size_t histogram_bins = 50;
    bool sampled_qoe = false;
    std::size_t workers = 1;
    std::string output_dir = "results";
};

/// Parses a JSON config (comments allowed). Missing keys take defaults;
/// unknown keys and invariant violations throw std::invalid_argument naming
/// the offending key path. Relative CSV paths resolve against the config
/// file's directory.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Loads or synthesizes the dataset, applies standardization and label
/// noise, and splits it into competition and evaluation parts.
SplitPair prepare_data(const ExperimentConfig& cfg);

}  // namespace mlcomp
