#include "mlcomp/metrics.hpp"

#include "mlcomp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlcomp {

PredictionTable::PredictionTable(std::size_t n_models, std::size_t n_classes, std::vector<std::size_t> labels,
                                 std::vector<std::size_t> predictions)
    : n_models_(n_models), n_classes_(n_classes), labels_(std::move(labels)), predictions_(std::move(predictions)) {
    if (n_models_ == 0) throw std::invalid_argument("PredictionTable: no models");
    if (predictions_.size() != labels_.size() * n_models_) {
        throw std::invalid_argument("PredictionTable: prediction count mismatch");
    }
    for (auto l : labels_) {
        if (l >= n_classes_) throw std::invalid_argument("PredictionTable: label out of range");
    }
    for (auto p : predictions_) {
        if (p >= n_classes_) throw std::invalid_argument("PredictionTable: prediction out of range");
    }
}

PredictionTable tabulate(std::span<const Model* const> models, const Dataset& eval_set) {
    if (models.empty()) throw std::invalid_argument("tabulate: no models");
    std::vector<std::size_t> labels;
    std::vector<std::size_t> preds;
    labels.reserve(eval_set.size());
    preds.reserve(eval_set.size() * models.size());
    for (const auto& ex : eval_set.examples) {
        labels.push_back(ex.label);
        for (const Model* m : models) preds.push_back(m->predict_label(ex.features));
    }
    return PredictionTable(models.size(), eval_set.n_classes, std::move(labels), std::move(preds));
}

std::vector<const Model*> models_of(const MarketState& m) {
    std::vector<const Model*> out;
    out.reserve(m.size());
    for (const auto& p : m.predictors) out.push_back(&p.model);
    return out;
}

namespace {

void require_points(const PredictionTable& t, const char* what) {
    if (t.n_points() == 0) throw std::invalid_argument(std::string(what) + ": empty evaluation set");
}

std::vector<double> point_qualities(const PredictionTable& t, std::size_t point, const QualityFunction& q) {
    std::vector<double> out(t.n_models());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = q(t.label(point), t.prediction(point, j));
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double expected_selected_quality(const std::vector<double>& qualities, double alpha) {
    const auto p = selection_probabilities(qualities, alpha);
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * qualities[j];
    return s;
}

}  // namespace

EvalPointSummary eval_point_summary(const PredictionTable& t, std::size_t point, const QualityFunction& q,
                                    double alpha) {
    if (point >= t.n_points()) throw std::out_of_range("eval_point_summary: point out of range");
    EvalPointSummary s;
    s.per_predictor_quality = point_qualities(t, point, q);
    s.z = mean_of(s.per_predictor_quality);
    s.selection_probs = selection_probabilities(s.per_predictor_quality, alpha);
    return s;
}

std::vector<double> average_qualities(const PredictionTable& t, const QualityFunction& q) {
    std::vector<double> z(t.n_points());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = mean_of(point_qualities(t, i, q));
    return z;
}

double overall_quality(const PredictionTable& t, const QualityFunction& q) {
    require_points(t, "overall_quality");
    return mean_of(average_qualities(t, q));
}

double qoe(const PredictionTable& t, const QualityFunction& q, double alpha) {
    require_points(t, "qoe");
    if (!(alpha >= 0.0)) throw std::invalid_argument("qoe: alpha must be >= 0");
    double s = 0.0;
    for (std::size_t i = 0; i < t.n_points(); ++i) s += expected_selected_quality(point_qualities(t, i, q), alpha);
    return s / static_cast<double>(t.n_points());
}

double qoe_sampled(const PredictionTable& t, const QualityFunction& q, double alpha, std::uint64_t seed) {
    require_points(t, "qoe_sampled");
    if (!(alpha >= 0.0)) throw std::invalid_argument("qoe_sampled: alpha must be >= 0");
    Rng rng(seed);
    double s = 0.0;
    for (std::size_t i = 0; i < t.n_points(); ++i) {
        const auto qs = point_qualities(t, i, q);
        s += qs[sample_index(selection_probabilities(qs, alpha), rng)];
    }
    return s / static_cast<double>(t.n_points());
}

double diversity(const PredictionTable& t) {
    require_points(t, "diversity");
    std::vector<std::size_t> counts(t.n_classes());
    const double m = static_cast<double>(t.n_models());
    double total = 0.0;
    for (std::size_t i = 0; i < t.n_points(); ++i) {
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t j = 0; j < t.n_models(); ++j) ++counts[t.prediction(i, j)];
        double h = 0.0;
        for (auto c : counts) {
            if (c == 0) continue;
            const double p = static_cast<double>(c) / m;
            h -= p * std::log(p);
        }
        total += h;
    }
    return total / static_cast<double>(t.n_points());
}

ClassQuality class_specific_quality(const PredictionTable& t, const QualityFunction& q) {
    const std::size_t k = t.n_classes();
    const std::size_t m = t.n_models();
    std::vector<std::size_t> class_count(k, 0);
    ClassQuality out;
    out.matrix.assign(m, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < t.n_points(); ++i) {
        const std::size_t y = t.label(i);
        ++class_count[y];
        for (std::size_t j = 0; j < m; ++j) out.matrix[j][y] += q(y, t.prediction(i, j));
    }
    for (std::size_t y = 0; y < k; ++y) {
        if (class_count[y] == 0) {
            throw std::invalid_argument("class_specific_quality: class " + std::to_string(y) +
                                        " has no evaluation examples");
        }
    }
    out.class_average.assign(k, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t y = 0; y < k; ++y) {
            out.matrix[j][y] /= static_cast<double>(class_count[y]);
            out.class_average[y] += out.matrix[j][y];
        }
    }
    for (auto& v : out.class_average) v /= static_cast<double>(m);
    out.centered = out.matrix;
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t y = 0; y < k; ++y) out.centered[j][y] -= out.class_average[y];
    }
    return out;
}

double DensityHistogram::mass_below(std::size_t bin_count) const {
    double mass = 0.0;
    for (std::size_t b = 0; b < std::min(bin_count, densities.size()); ++b) {
        mass += densities[b] * (edges[b + 1] - edges[b]);
    }
    return mass;
}

DensityHistogram z_histogram(const PredictionTable& t, const QualityFunction& q, std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("z_histogram: need at least one bin");
    DensityHistogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = static_cast<double>(b) / static_cast<double>(bins);
    h.densities.assign(bins, 0.0);
    if (t.n_points() == 0) return h;
    std::vector<std::size_t> counts(bins, 0);
    for (double z : average_qualities(t, q)) {
        if (z < 0.0 || z > 1.0) {
            throw std::domain_error("z_histogram: average quality outside [0, 1]");
        }
        const auto b = std::min(static_cast<std::size_t>(z * static_cast<double>(bins)), bins - 1);
        ++counts[b];
    }
    const double n = static_cast<double>(t.n_points());
    for (std::size_t b = 0; b < bins; ++b) {
        h.densities[b] = static_cast<double>(counts[b]) / (n * (h.edges[b + 1] - h.edges[b]));
    }
    return h;
}

MetricReport evaluate(std::span<const Model* const> models, const Dataset& eval_set, const QualityFunction& q,
                      const EvaluationOptions& options) {
    const PredictionTable t = tabulate(models, eval_set);
    MetricReport r;
    r.n_eval = t.n_points();
    r.overall_quality = overall_quality(t, q);
    r.qoe = options.sampled_qoe ? qoe_sampled(t, q, options.alpha, options.sample_seed) : qoe(t, q, options.alpha);
    r.diversity = diversity(t);
    std::size_t low = 0;
    for (double z : average_qualities(t, q)) low += z <= 0.1 ? 1 : 0;
    r.low_z_mass = static_cast<double>(low) / static_cast<double>(t.n_points());
    r.class_quality = class_specific_quality(t, q);
    r.z_histogram = z_histogram(t, q, options.histogram_bins);
    return r;
}

}  // namespace mlcomp
