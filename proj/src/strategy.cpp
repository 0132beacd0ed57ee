#include "mlcomp/strategy.hpp"

#include <cmath>
#include <stdexcept>

namespace mlcomp {

void BuyingStrategy::validate() const {
    if (!(threshold_fraction >= 0.0 && threshold_fraction <= 1.0)) {
        throw std::invalid_argument("BuyingStrategy: threshold_fraction must be in [0, 1]");
    }
}

double shannon_entropy(const ProbabilityEstimate& p) {
    double h = 0.0;
    for (double v : p.probs) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

bool wants_to_buy(const BuyingStrategy& s, const ProbabilityEstimate& p, std::size_t n_classes) {
    return shannon_entropy(p) >= s.threshold_fraction * std::log(static_cast<double>(n_classes));
}

bool shows_purchase_intent(const Budget& b, bool wants) {
    return b.remaining() >= 1 && wants;
}

Budget charge(Budget b) {
    if (b.remaining_ == 0) throw std::logic_error("charge: budget exhausted");
    --b.remaining_;
    return b;
}

}  // namespace mlcomp
