#pragma once

#include "mlcomp/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mlcomp {

enum class ModelKind { logistic, one_hidden_layer };

struct ModelSpec {
    ModelKind kind = ModelKind::logistic;
    std::size_t hidden_nodes = 0;  // one_hidden_layer only
    std::size_t input_dim = 0;
    std::size_t n_classes = 2;

    void validate() const;
    std::size_t parameter_count() const;
};

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 1e-2;
    std::size_t batch_size = 64;
    std::size_t retrain_period = 50;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t init_seed = 0;
    /// Re-initialize parameters and optimizer state before each periodic retrain.
    bool cold_retrain = false;

    void validate() const;
};

struct ProbabilityEstimate {
    std::vector<double> probs;
};

/// One bias-corrected Adam update. `step` is the 1-based index of this update.
void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
               std::span<double> second_moment, std::uint64_t step, double lr, double beta1, double beta2,
               double epsilon);

/// Named view of one parameter block inside the flat parameter vector.
struct TensorLayout {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

std::vector<TensorLayout> parameter_layout(const ModelSpec& spec);

/// Logits for one input under a flat parameter vector.
std::vector<double> compute_logits(const ModelSpec& spec, std::span<const double> params,
                                   std::span<const double> x);

/// Numerically stable softmax (max-shifted).
std::vector<double> softmax(std::span<const double> logits);

/// Mean cross-entropy over the batch; writes d(loss)/d(params) into grad.
double loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                         std::span<const LabeledExample* const> batch, std::span<double> grad);

double mean_cross_entropy(const ModelSpec& spec, std::span<const double> params,
                          std::span<const LabeledExample* const> batch);

/// An online classifier with its optimizer state and training set.
class Model {
public:
    /// Initializes from cfg.init_seed and trains cfg.epochs passes over seed_data.
    static Model init_and_seed_train(const ModelSpec& spec, std::span<const LabeledExample> seed_data,
                                     const TrainConfig& cfg);

    /// Wraps explicit parameters (no training data, fresh optimizer state).
    static Model from_parameters(const ModelSpec& spec, std::vector<double> params);

    ProbabilityEstimate predict_proba(std::span<const double> x) const;

    /// Argmax of predict_proba; ties go to the lowest class index.
    std::size_t predict_label(std::span<const double> x) const;

    /// Appends ex, takes one Adam step on it alone, and retrains over all owned
    /// data every cfg.retrain_period absorptions. Returns true if a retrain ran.
    bool absorb_datum(const LabeledExample& ex, const TrainConfig& cfg);

    const ModelSpec& spec() const { return spec_; }
    std::span<const double> parameters() const { return params_; }
    const std::vector<LabeledExample>& owned_data() const { return owned_; }
    std::size_t since_retrain() const { return since_retrain_; }
    std::size_t retrain_count() const { return retrain_count_; }
    std::uint64_t optimizer_steps() const { return adam_t_; }

    /// FNV-1a over the parameter bytes; changes whenever any parameter does.
    std::uint64_t fingerprint() const;

    /// {"kind", "input_dim", "n_classes", "hidden_nodes", "tensors": [{"name", "shape", "values"}]}
    /// with row-major values.
    std::string checkpoint_json() const;
    static Model from_checkpoint_json(const std::string& text);

private:
    Model() = default;
    void initialize(std::uint64_t init_seed);
    void full_train(const TrainConfig& cfg);
    void apply_gradient(std::span<const double> grad, const TrainConfig& cfg);

    ModelSpec spec_;
    std::vector<double> params_;
    std::vector<double> adam_m_;
    std::vector<double> adam_v_;
    std::uint64_t adam_t_ = 0;
    std::vector<LabeledExample> owned_;
    std::size_t since_retrain_ = 0;
    std::size_t retrain_count_ = 0;
};

}  // namespace mlcomp
