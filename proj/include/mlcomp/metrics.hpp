#pragma once

#include "mlcomp/dataset.hpp"
#include "mlcomp/environment.hpp"
#include "mlcomp/models.hpp"
#include "mlcomp/quality.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mlcomp {

// Population metrics over a held-out set. Nothing here touches budgets or
// buying strategies. All reductions run sequentially in point order, so
// results are bit-reproducible.

/// Class predictions of every model at every evaluation point.
class PredictionTable {
public:
    PredictionTable(std::size_t n_models, std::size_t n_classes, std::vector<std::size_t> labels,
                    std::vector<std::size_t> predictions);

    std::size_t n_points() const { return labels_.size(); }
    std::size_t n_models() const { return n_models_; }
    std::size_t n_classes() const { return n_classes_; }
    std::size_t label(std::size_t point) const { return labels_[point]; }
    std::size_t prediction(std::size_t point, std::size_t model) const {
        return predictions_[point * n_models_ + model];
    }

private:
    std::size_t n_models_;
    std::size_t n_classes_;
    std::vector<std::size_t> labels_;
    std::vector<std::size_t> predictions_;  // row-major point x model
};

PredictionTable tabulate(std::span<const Model* const> models, const Dataset& eval_set);

std::vector<const Model*> models_of(const MarketState& m);

struct EvalPointSummary {
    std::vector<double> per_predictor_quality;
    double z = 0.0;  // mean of per_predictor_quality
    std::vector<double> selection_probs;
};

EvalPointSummary eval_point_summary(const PredictionTable& t, std::size_t point, const QualityFunction& q,
                                    double alpha);

/// Per-point average quality Z.
std::vector<double> average_qualities(const PredictionTable& t, const QualityFunction& q);

double overall_quality(const PredictionTable& t, const QualityFunction& q);

/// Exact conditional expectation: mean over points of sum_j p_j(alpha) q_j.
double qoe(const PredictionTable& t, const QualityFunction& q, double alpha);

/// Monte Carlo variant that samples the selected index once per point.
double qoe_sampled(const PredictionTable& t, const QualityFunction& q, double alpha, std::uint64_t seed);

/// Mean Shannon entropy (nats) of the predicted-class shares at each point.
double diversity(const PredictionTable& t);

struct ClassQuality {
    std::vector<std::vector<double>> matrix;    // [predictor][class] = Q(j, y)
    std::vector<double> class_average;          // Q_avg(y)
    std::vector<std::vector<double>> centered;  // Q(j, y) - Q_avg(y)
};

ClassQuality class_specific_quality(const PredictionTable& t, const QualityFunction& q);

struct DensityHistogram {
    std::vector<double> edges;      // bins + 1 uniform edges on [0, 1]
    std::vector<double> densities;  // count / (n * width)

    double mass_below(std::size_t bin_count) const;  // sum of the first bin_count bins' mass
};

/// Z in bin floor(Z * bins), with Z = 1 folded into the last bin.
DensityHistogram z_histogram(const PredictionTable& t, const QualityFunction& q, std::size_t bins);

struct MetricReport {
    double overall_quality = 0.0;
    double qoe = 0.0;
    double diversity = 0.0;
    double low_z_mass = 0.0;  // fraction of points with Z <= 0.1
    ClassQuality class_quality;
    DensityHistogram z_histogram;
    std::size_t n_eval = 0;
};

struct EvaluationOptions {
    double alpha = 0.0;
    std::size_t histogram_bins = 50;
    bool sampled_qoe = false;
    std::uint64_t sample_seed = 0;
};

MetricReport evaluate(std::span<const Model* const> models, const Dataset& eval_set, const QualityFunction& q,
                      const EvaluationOptions& options);

}  // namespace mlcomp
