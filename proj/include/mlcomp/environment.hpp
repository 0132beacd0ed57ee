#pragma once

#include "mlcomp/dataset.hpp"
#include "mlcomp/models.hpp"
#include "mlcomp/quality.hpp"
#include "mlcomp/rng.hpp"
#include "mlcomp/strategy.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlcomp {

struct PredictorState {
    std::size_t id = 0;
    Model model;
    BuyingStrategy strategy;
    Budget budget;
    TrainConfig train_cfg;
};

enum class SelectionMode { purchase, quality };

const char* to_string(SelectionMode mode);

struct RoundRecord {
    std::uint64_t t = 0;
    std::vector<std::size_t> buyer_ids;  // ascending
    std::size_t winner = 0;
    SelectionMode mode = SelectionMode::quality;
    std::vector<std::size_t> predictions;  // one per predictor, in id order
    std::size_t user_index = 0;            // index into the competition set
    std::size_t user_label = 0;
    bool retrained = false;  // the winner's absorb triggered a full retrain

    bool operator==(const RoundRecord&) const = default;
};

/// Everything that evolves during a run. The market RNG is consumed exactly
/// once per round: a uniform buyer index in purchase mode, or one uniform
/// real for the softmax draw in quality mode.
struct MarketState {
    MarketState(std::vector<PredictorState> predictors, double alpha, QualityFunction quality,
                std::uint64_t rng_seed, std::uint64_t horizon);

    std::vector<PredictorState> predictors;
    std::uint64_t round = 0;
    std::uint64_t horizon = 0;  // T
    std::uint64_t rng_seed = 0;
    double alpha = 0.0;
    QualityFunction quality;
    Rng rng;

    std::size_t size() const { return predictors.size(); }
};

/// Ids (ascending) of predictors with budget left whose strategy wants x.
std::vector<std::size_t> collect_buyers(const MarketState& m, std::span<const double> x);

std::size_t select_among_buyers(std::span<const std::size_t> buyers, Rng& rng);

/// Softmax of alpha * qualities, max-shifted.
std::vector<double> selection_probabilities(std::span<const double> qualities, double alpha);

/// Inverse-CDF draw from a probability vector using one uniform real.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

std::size_t select_by_quality(const MarketState& m, const LabeledExample& user, Rng& rng);

/// Advances the market by one user. Only the winner's model and budget change.
RoundRecord run_round(MarketState& m, const LabeledExample& user, std::size_t user_index = 0);

struct PredictorConfig {
    std::size_t n_seed = 100;
    std::uint64_t budget = 0;
    ModelSpec model;
    BuyingStrategy strategy;
    TrainConfig train;
};

struct CompetitionConfig {
    std::vector<PredictorConfig> predictors;
    double alpha = 0.0;
    QualityFunction quality = QualityFunction::correctness();
    /// Drives seed-data sampling, model initialization (each predictor's
    /// init_seed is derived from it, overriding train.init_seed) and the
    /// market RNG.
    std::uint64_t seed = 0;
};

struct RoundObserver {
    std::function<void(const MarketState&)> on_start;
    std::function<void(const MarketState&, const RoundRecord&)> on_round;
};

struct CompetitionResult {
    MarketState market;
    std::vector<RoundRecord> history;
};

/// Seed-trains every predictor on its own i.i.d. sample from the stream's
/// source, then plays `rounds` rounds with user t = stream.draw(t).
CompetitionResult run_competition(const CompetitionConfig& cfg, const UserStream& stream, std::uint64_t rounds,
                                  const RoundObserver& observer = {});

/// One JSON object per line: t, mode, winner, buyers, predictions,
/// user_index, user_label, retrained.
void write_round_ndjson(std::ostream& out, const RoundRecord& r);
RoundRecord parse_round_ndjson(const std::string& line);

}  // namespace mlcomp
