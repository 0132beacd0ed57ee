#pragma once

#include "mlcomp/models.hpp"

#include <cstddef>
#include <cstdint>

namespace mlcomp {

/// Entropy-threshold buying rule: buy when Ent(p) >= threshold_fraction * ln K.
struct BuyingStrategy {
    double threshold_fraction = 0.3;

    void validate() const;
};

class Budget {
public:
    explicit Budget(std::uint64_t initial = 0) : remaining_(initial), initial_(initial) {}

    std::uint64_t remaining() const { return remaining_; }
    std::uint64_t initial() const { return initial_; }
    std::uint64_t spent() const { return initial_ - remaining_; }

    friend Budget charge(Budget b);

    bool operator==(const Budget&) const = default;

private:
    std::uint64_t remaining_;
    std::uint64_t initial_;
};

/// Shannon entropy in nats with 0 ln 0 = 0.
double shannon_entropy(const ProbabilityEstimate& p);

bool wants_to_buy(const BuyingStrategy& s, const ProbabilityEstimate& p, std::size_t n_classes);

bool shows_purchase_intent(const Budget& b, bool wants);

/// Spends one unit; throws std::logic_error on an exhausted budget.
Budget charge(Budget b);

}  // namespace mlcomp
