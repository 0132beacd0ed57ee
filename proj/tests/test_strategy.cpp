#include "mlcomp/strategy.hpp"
#include "mlcomp/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mlcomp;

TEST(Entropy, KnownValues) {
    EXPECT_EQ(shannon_entropy({{1.0, 0.0}}), 0.0);
    EXPECT_NEAR(shannon_entropy({{0.5, 0.5}}), std::log(2.0), 1e-15);
    const double direct = -(0.9 * std::log(0.9) + 0.1 * std::log(0.1));
    EXPECT_NEAR(shannon_entropy({{0.9, 0.1}}), direct, 1e-15);
    EXPECT_NEAR(direct, 0.325083, 1e-6);
}

TEST(Entropy, BoundedByLogK) {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t k = 2 + uniform_index(rng, 6);
        std::vector<double> p(k);
        double s = 0.0;
        for (auto& v : p) {
            v = uniform01(rng) < 0.2 ? 0.0 : uniform01(rng);
            s += v;
        }
        if (s == 0.0) continue;
        for (auto& v : p) v /= s;
        const double h = shannon_entropy({p});
        ASSERT_GE(h, 0.0);
        ASSERT_LE(h, std::log(static_cast<double>(k)) + 1e-12);
    }
}

TEST(BuyingRule, ThresholdExamples) {
    EXPECT_TRUE(wants_to_buy({0.0}, {{1.0, 0.0}}, 2));
    EXPECT_TRUE(wants_to_buy({0.3}, {{0.9, 0.1}}, 2));
    EXPECT_FALSE(wants_to_buy({1.0}, {{0.6, 0.4}}, 2));
    EXPECT_TRUE(wants_to_buy({1.0}, {{0.5, 0.5}}, 2));
}

TEST(BuyingRule, MonotoneInThreshold) {
    Rng rng(2);
    for (int trial = 0; trial < 2000; ++trial) {
        const double a = uniform01(rng);
        const ProbabilityEstimate p{{a, 1.0 - a}};
        const double c = uniform01(rng);
        const double c2 = c + (1.0 - c) * uniform01(rng);
        if (!wants_to_buy({c}, p, 2)) ASSERT_FALSE(wants_to_buy({c2}, p, 2));
    }
}

TEST(BuyingRule, ValidatesThreshold) {
    EXPECT_THROW(BuyingStrategy{1.5}.validate(), std::invalid_argument);
    EXPECT_THROW(BuyingStrategy{-0.1}.validate(), std::invalid_argument);
}

TEST(PurchaseIntent, Conjunction) {
    EXPECT_FALSE(shows_purchase_intent(Budget(0), true));
    EXPECT_FALSE(shows_purchase_intent(Budget(3), false));
    EXPECT_TRUE(shows_purchase_intent(Budget(1), true));
}

TEST(Budget, Charge) {
    EXPECT_EQ(charge(Budget(5)).remaining(), 4u);
    const Budget b = charge(Budget(1));
    EXPECT_EQ(b.remaining(), 0u);
    EXPECT_EQ(b.initial(), 1u);
    EXPECT_EQ(b.spent(), 1u);
    EXPECT_THROW(charge(Budget(0)), std::logic_error);
}

TEST(Budget, SpentTracksCharges) {
    Budget b(10);
    for (int i = 0; i < 7; ++i) b = charge(b);
    EXPECT_EQ(b.spent(), 7u);
    EXPECT_EQ(b.initial() - b.remaining(), 7u);
}
