#include "mlcomp/environment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mlcomp {

const char* to_string(SelectionMode mode) {
    return mode == SelectionMode::purchase ? "purchase" : "quality";
}

MarketState::MarketState(std::vector<PredictorState> predictors_, double alpha_, QualityFunction quality_,
                         std::uint64_t rng_seed_, std::uint64_t horizon_)
    : predictors(std::move(predictors_)),
      horizon(horizon_),
      rng_seed(rng_seed_),
      alpha(alpha_),
      quality(std::move(quality_)),
      rng(rng_seed_) {
    if (predictors.size() < 2) throw std::invalid_argument("MarketState: need at least two predictors");
    if (!(alpha >= 0.0)) throw std::invalid_argument("MarketState: alpha must be >= 0");
    for (std::size_t i = 0; i < predictors.size(); ++i) {
        if (predictors[i].id != i) throw std::invalid_argument("MarketState: predictor ids must be 0..M-1 in order");
        predictors[i].strategy.validate();
    }
}

std::vector<std::size_t> collect_buyers(const MarketState& m, std::span<const double> x) {
    std::vector<std::size_t> buyers;
    for (const auto& p : m.predictors) {
        if (p.budget.remaining() == 0) continue;
        const auto probs = p.model.predict_proba(x);
        if (shows_purchase_intent(p.budget, wants_to_buy(p.strategy, probs, p.model.spec().n_classes))) {
            buyers.push_back(p.id);
        }
    }
    return buyers;
}

std::size_t select_among_buyers(std::span<const std::size_t> buyers, Rng& rng) {
    if (buyers.empty()) throw std::invalid_argument("select_among_buyers: no buyers");
    return buyers[static_cast<std::size_t>(uniform_index(rng, buyers.size()))];
}

std::vector<double> selection_probabilities(std::span<const double> qualities, double alpha) {
    if (qualities.empty()) throw std::invalid_argument("selection_probabilities: no predictors");
    if (!(alpha >= 0.0)) throw std::invalid_argument("selection_probabilities: alpha must be >= 0");
    const double mx = *std::max_element(qualities.begin(), qualities.end());
    std::vector<double> p(qualities.size());
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(alpha * (qualities[i] - mx));
        s += p[i];
    }
    for (auto& v : p) v /= s;
    return p;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
    const double u = uniform01(rng);
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    // Rounding left cum slightly below 1; fall back to the last positive entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    throw std::invalid_argument("sample_index: all probabilities are zero");
}

namespace {

std::size_t select_by_quality_with(const MarketState& m, std::span<const std::size_t> predictions,
                                   std::size_t label, Rng& rng) {
    std::vector<double> q(predictions.size());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = m.quality(label, predictions[j]);
    return sample_index(selection_probabilities(q, m.alpha), rng);
}

}  // namespace

std::size_t select_by_quality(const MarketState& m, const LabeledExample& user, Rng& rng) {
    std::vector<std::size_t> predictions(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) predictions[j] = m.predictors[j].model.predict_label(user.features);
    return select_by_quality_with(m, predictions, user.label, rng);
}

RoundRecord run_round(MarketState& m, const LabeledExample& user, std::size_t user_index) {
    if (m.round >= m.horizon) throw std::logic_error("run_round: competition horizon reached");
    RoundRecord rec;
    rec.t = m.round;
    rec.user_index = user_index;
    rec.user_label = user.label;

    rec.predictions.resize(m.size());
    for (auto& p : m.predictors) {
        const auto probs = p.model.predict_proba(user.features);
        rec.predictions[p.id] =
            static_cast<std::size_t>(std::max_element(probs.probs.begin(), probs.probs.end()) - probs.probs.begin());
        if (shows_purchase_intent(p.budget, wants_to_buy(p.strategy, probs, p.model.spec().n_classes))) {
            rec.buyer_ids.push_back(p.id);
        }
    }

    if (!rec.buyer_ids.empty()) {
        rec.mode = SelectionMode::purchase;
        rec.winner = select_among_buyers(rec.buyer_ids, m.rng);
        auto& w = m.predictors[rec.winner];
        w.budget = charge(w.budget);
    } else {
        rec.mode = SelectionMode::quality;
        rec.winner = select_by_quality_with(m, rec.predictions, user.label, m.rng);
    }

    auto& w = m.predictors[rec.winner];
    rec.retrained = w.model.absorb_datum(user, w.train_cfg);
    ++m.round;
    return rec;
}

CompetitionResult run_competition(const CompetitionConfig& cfg, const UserStream& stream, std::uint64_t rounds,
                                  const RoundObserver& observer) {
    const Dataset& source = stream.source();
    std::vector<PredictorState> predictors;
    predictors.reserve(cfg.predictors.size());
    for (std::size_t i = 0; i < cfg.predictors.size(); ++i) {
        const auto& pc = cfg.predictors[i];
        if (pc.n_seed == 0) throw std::invalid_argument("run_competition: n_seed must be >= 1");
        if (pc.model.input_dim != source.dim || pc.model.n_classes != source.n_classes) {
            throw std::invalid_argument("run_competition: model shape does not match the dataset");
        }
        // Seed data: an independent i.i.d. sample per predictor.
        const UserStream seed_stream(source, derive_seed(cfg.seed, {1, i}));
        std::vector<LabeledExample> seed_data;
        seed_data.reserve(pc.n_seed);
        for (std::size_t s = 0; s < pc.n_seed; ++s) seed_data.push_back(seed_stream.draw(s));

        TrainConfig train = pc.train;
        train.init_seed = derive_seed(cfg.seed, {2, i});
        predictors.push_back(PredictorState{
            .id = i,
            .model = Model::init_and_seed_train(pc.model, seed_data, train),
            .strategy = pc.strategy,
            .budget = Budget(pc.budget),
            .train_cfg = train,
        });
    }

    CompetitionResult result{
        MarketState(std::move(predictors), cfg.alpha, cfg.quality, derive_seed(cfg.seed, {3}), rounds), {}};
    result.history.reserve(rounds);
    if (observer.on_start) observer.on_start(result.market);
    for (std::uint64_t t = 0; t < rounds; ++t) {
        const std::size_t idx = stream.draw_index(t);
        result.history.push_back(run_round(result.market, source.examples[idx], idx));
        if (observer.on_round) observer.on_round(result.market, result.history.back());
    }
    return result;
}

void write_round_ndjson(std::ostream& out, const RoundRecord& r) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["mode"] = to_string(r.mode);
    j["winner"] = r.winner;
    j["buyers"] = r.buyer_ids;
    j["predictions"] = r.predictions;
    j["user_index"] = r.user_index;
    j["user_label"] = r.user_label;
    j["retrained"] = r.retrained;
    out << j.dump() << '\n';
}

RoundRecord parse_round_ndjson(const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    RoundRecord r;
    r.t = j.at("t").get<std::uint64_t>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "purchase") {
        r.mode = SelectionMode::purchase;
    } else if (mode == "quality") {
        r.mode = SelectionMode::quality;
    } else {
        throw std::invalid_argument("parse_round_ndjson: unknown mode '" + mode + "'");
    }
    r.winner = j.at("winner").get<std::size_t>();
    r.buyer_ids = j.at("buyers").get<std::vector<std::size_t>>();
    r.predictions = j.at("predictions").get<std::vector<std::size_t>>();
    r.user_index = j.at("user_index").get<std::size_t>();
    r.user_label = j.at("user_label").get<std::size_t>();
    r.retrained = j.at("retrained").get<bool>();
    return r;
}

}  // namespace mlcomp
