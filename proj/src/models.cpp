#include "mlcomp/models.hpp"

#include "mlcomp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace mlcomp {

void ModelSpec::validate() const {
    if (input_dim == 0) throw std::invalid_argument("ModelSpec: input_dim must be >= 1");
    if (n_classes < 2) throw std::invalid_argument("ModelSpec: n_classes must be >= 2");
    if (kind == ModelKind::one_hidden_layer && hidden_nodes == 0) {
        throw std::invalid_argument("ModelSpec: hidden_nodes must be >= 1");
    }
}

std::size_t ModelSpec::parameter_count() const {
    if (kind == ModelKind::logistic) return n_classes * input_dim + n_classes;
    return hidden_nodes * input_dim + hidden_nodes + n_classes * hidden_nodes + n_classes;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (retrain_period < 1) throw std::invalid_argument("TrainConfig: retrain_period must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        throw std::invalid_argument("TrainConfig: Adam betas must be in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("TrainConfig: adam_epsilon must be > 0");
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> first_moment,
               std::span<double> second_moment, std::uint64_t step, double lr, double beta1, double beta2,
               double epsilon) {
    if (grads.size() != params.size() || first_moment.size() != params.size() ||
        second_moment.size() != params.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (step < 1) throw std::invalid_argument("adam_step: step must be >= 1");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * g;
        second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * g * g;
        const double m_hat = first_moment[i] / bc1;
        const double v_hat = second_moment[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

std::vector<TensorLayout> parameter_layout(const ModelSpec& spec) {
    std::vector<TensorLayout> out;
    std::size_t offset = 0;
    auto add = [&](std::string name, std::vector<std::size_t> shape) {
        std::size_t size = 1;
        for (auto s : shape) size *= s;
        out.push_back({std::move(name), std::move(shape), offset, size});
        offset += size;
    };
    const std::size_t d = spec.input_dim;
    const std::size_t k = spec.n_classes;
    if (spec.kind == ModelKind::logistic) {
        add("weight", {k, d});
        add("bias", {k});
    } else {
        const std::size_t h = spec.hidden_nodes;
        add("hidden.weight", {h, d});
        add("hidden.bias", {h});
        add("output.weight", {k, h});
        add("output.bias", {k});
    }
    return out;
}

namespace {

void check_input(const ModelSpec& spec, std::span<const double> x) {
    if (x.size() != spec.input_dim) {
        throw std::invalid_argument("model: input has " + std::to_string(x.size()) + " features, expected " +
                                    std::to_string(spec.input_dim));
    }
}

// Affine map out = W x + b for W stored row-major (rows x cols).
void affine(std::span<const double> w, std::span<const double> b, std::span<const double> x,
            std::span<double> out) {
    const std::size_t cols = x.size();
    for (std::size_t r = 0; r < out.size(); ++r) {
        double acc = b[r];
        const double* row = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

struct Forward {
    std::vector<double> hidden_pre;  // empty for logistic
    std::vector<double> hidden;
    std::vector<double> logits;
};

Forward forward(const ModelSpec& spec, std::span<const double> params, std::span<const double> x) {
    Forward f;
    const std::size_t d = spec.input_dim;
    const std::size_t k = spec.n_classes;
    f.logits.resize(k);
    if (spec.kind == ModelKind::logistic) {
        affine(params.subspan(0, k * d), params.subspan(k * d, k), x, f.logits);
        return f;
    }
    const std::size_t h = spec.hidden_nodes;
    std::size_t off = 0;
    auto w1 = params.subspan(off, h * d);
    off += h * d;
    auto b1 = params.subspan(off, h);
    off += h;
    auto w2 = params.subspan(off, k * h);
    off += k * h;
    auto b2 = params.subspan(off, k);
    f.hidden_pre.resize(h);
    affine(w1, b1, x, f.hidden_pre);
    f.hidden.resize(h);
    for (std::size_t i = 0; i < h; ++i) f.hidden[i] = std::max(0.0, f.hidden_pre[i]);
    affine(w2, b2, f.hidden, f.logits);
    return f;
}

double log_sum_exp(std::span<const double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - mx);
    return mx + std::log(s);
}

}  // namespace

std::vector<double> compute_logits(const ModelSpec& spec, std::span<const double> params,
                                   std::span<const double> x) {
    check_input(spec, x);
    return forward(spec, params, x).logits;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    const double mx = *std::max_element(logits.begin(), logits.end());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        s += p[i];
    }
    for (auto& v : p) v /= s;
    return p;
}

double loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                         std::span<const LabeledExample* const> batch, std::span<double> grad) {
    if (params.size() != spec.parameter_count() || grad.size() != params.size()) {
        throw std::invalid_argument("loss_and_gradient: parameter size mismatch");
    }
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    std::fill(grad.begin(), grad.end(), 0.0);
    const std::size_t d = spec.input_dim;
    const std::size_t k = spec.n_classes;
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    std::vector<double> dz(k);
    for (const LabeledExample* ex : batch) {
        check_input(spec, ex->features);
        if (ex->label >= k) throw std::invalid_argument("loss_and_gradient: label out of range");
        const Forward f = forward(spec, params, ex->features);
        const double lse = log_sum_exp(f.logits);
        loss += (lse - f.logits[ex->label]) * scale;
        for (std::size_t c = 0; c < k; ++c) {
            dz[c] = (std::exp(f.logits[c] - lse) - (c == ex->label ? 1.0 : 0.0)) * scale;
        }
        const auto& x = ex->features;
        if (spec.kind == ModelKind::logistic) {
            for (std::size_t c = 0; c < k; ++c) {
                double* row = grad.data() + c * d;
                for (std::size_t j = 0; j < d; ++j) row[j] += dz[c] * x[j];
                grad[k * d + c] += dz[c];
            }
            continue;
        }
        const std::size_t h = spec.hidden_nodes;
        const std::size_t off_b1 = h * d;
        const std::size_t off_w2 = off_b1 + h;
        const std::size_t off_b2 = off_w2 + k * h;
        std::vector<double> dh(h, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            double* g_row = grad.data() + off_w2 + c * h;
            const double* w_row = params.data() + off_w2 + c * h;
            for (std::size_t i = 0; i < h; ++i) {
                g_row[i] += dz[c] * f.hidden[i];
                dh[i] += dz[c] * w_row[i];
            }
            grad[off_b2 + c] += dz[c];
        }
        for (std::size_t i = 0; i < h; ++i) {
            if (f.hidden_pre[i] <= 0.0) continue;
            double* g_row = grad.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) g_row[j] += dh[i] * x[j];
            grad[off_b1 + i] += dh[i];
        }
    }
    return loss;
}

double mean_cross_entropy(const ModelSpec& spec, std::span<const double> params,
                          std::span<const LabeledExample* const> batch) {
    if (batch.empty()) throw std::invalid_argument("mean_cross_entropy: empty batch");
    double loss = 0.0;
    for (const LabeledExample* ex : batch) {
        check_input(spec, ex->features);
        const auto z = forward(spec, params, ex->features).logits;
        loss += log_sum_exp(z) - z[ex->label];
    }
    return loss / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------

void Model::initialize(std::uint64_t init_seed) {
    params_.assign(spec_.parameter_count(), 0.0);
    Rng rng(derive_seed(init_seed, {}));
    for (const auto& t : parameter_layout(spec_)) {
        if (t.shape.size() != 2) continue;  // biases start at zero
        for (std::size_t i = 0; i < t.size; ++i) params_[t.offset + i] = uniform_real(rng, -0.05, 0.05);
    }
    adam_m_.assign(params_.size(), 0.0);
    adam_v_.assign(params_.size(), 0.0);
    adam_t_ = 0;
}

void Model::apply_gradient(std::span<const double> grad, const TrainConfig& cfg) {
    ++adam_t_;
    adam_step(params_, grad, adam_m_, adam_v_, adam_t_, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
              cfg.adam_epsilon);
}

void Model::full_train(const TrainConfig& cfg) {
    std::vector<const LabeledExample*> order(owned_.size());
    for (std::size_t i = 0; i < owned_.size(); ++i) order[i] = &owned_[i];
    Rng rng(derive_seed(cfg.init_seed, {retrain_count_}));
    std::vector<double> grad(params_.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            loss_and_gradient(spec_, params_, std::span(order).subspan(start, len), grad);
            apply_gradient(grad, cfg);
        }
    }
}

Model Model::init_and_seed_train(const ModelSpec& spec, std::span<const LabeledExample> seed_data,
                                 const TrainConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (seed_data.empty()) throw std::invalid_argument("init_and_seed_train: no seed data");
    for (const auto& ex : seed_data) check_input(spec, ex.features);
    Model m;
    m.spec_ = spec;
    m.initialize(cfg.init_seed);
    m.owned_.assign(seed_data.begin(), seed_data.end());
    m.full_train(cfg);
    return m;
}

Model Model::from_parameters(const ModelSpec& spec, std::vector<double> params) {
    spec.validate();
    if (params.size() != spec.parameter_count()) {
        throw std::invalid_argument("Model::from_parameters: expected " + std::to_string(spec.parameter_count()) +
                                    " parameters");
    }
    Model m;
    m.spec_ = spec;
    m.params_ = std::move(params);
    m.adam_m_.assign(m.params_.size(), 0.0);
    m.adam_v_.assign(m.params_.size(), 0.0);
    return m;
}

ProbabilityEstimate Model::predict_proba(std::span<const double> x) const {
    check_input(spec_, x);
    return {softmax(forward(spec_, params_, x).logits)};
}

std::size_t Model::predict_label(std::span<const double> x) const {
    const auto p = predict_proba(x);
    // max_element returns the first maximum.
    return static_cast<std::size_t>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
}

bool Model::absorb_datum(const LabeledExample& ex, const TrainConfig& cfg) {
    cfg.validate();
    check_input(spec_, ex.features);
    owned_.push_back(ex);
    std::vector<double> grad(params_.size());
    const LabeledExample* single[] = {&owned_.back()};
    loss_and_gradient(spec_, params_, single, grad);
    apply_gradient(grad, cfg);
    if (++since_retrain_ < cfg.retrain_period) return false;
    since_retrain_ = 0;
    ++retrain_count_;
    if (cfg.cold_retrain) initialize(cfg.init_seed);
    full_train(cfg);
    return true;
}

std::uint64_t Model::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : params_) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string Model::checkpoint_json() const {
    nlohmann::ordered_json j;
    j["kind"] = spec_.kind == ModelKind::logistic ? "logistic" : "one_hidden_layer";
    j["input_dim"] = spec_.input_dim;
    j["n_classes"] = spec_.n_classes;
    j["hidden_nodes"] = spec_.hidden_nodes;
    j["tensors"] = nlohmann::ordered_json::array();
    for (const auto& t : parameter_layout(spec_)) {
        nlohmann::ordered_json tj;
        tj["name"] = t.name;
        tj["shape"] = t.shape;
        tj["values"] = std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(t.offset),
                                           params_.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size));
        j["tensors"].push_back(std::move(tj));
    }
    return j.dump(2);
}

Model Model::from_checkpoint_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "logistic") {
        spec.kind = ModelKind::logistic;
    } else if (kind == "one_hidden_layer") {
        spec.kind = ModelKind::one_hidden_layer;
    } else {
        throw std::invalid_argument("checkpoint: unknown model kind '" + kind + "'");
    }
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.n_classes = j.at("n_classes").get<std::size_t>();
    spec.hidden_nodes = j.at("hidden_nodes").get<std::size_t>();
    spec.validate();

    std::vector<double> params(spec.parameter_count());
    const auto layout = parameter_layout(spec);
    const auto& tensors = j.at("tensors");
    if (tensors.size() != layout.size()) throw std::invalid_argument("checkpoint: wrong tensor count");
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& tj = tensors[i];
        if (tj.at("name").get<std::string>() != layout[i].name ||
            tj.at("shape").get<std::vector<std::size_t>>() != layout[i].shape) {
            throw std::invalid_argument("checkpoint: tensor " + layout[i].name + " does not match spec");
        }
        const auto values = tj.at("values").get<std::vector<double>>();
        if (values.size() != layout[i].size) throw std::invalid_argument("checkpoint: wrong value count");
        std::copy(values.begin(), values.end(), params.begin() + static_cast<std::ptrdiff_t>(layout[i].offset));
    }
    return from_parameters(spec, std::move(params));
}

}  // namespace mlcomp
