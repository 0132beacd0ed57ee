#include "mlcomp/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace mlcomp;

TEST(Rng, DeriveSeedIsDeterministic) {
    EXPECT_EQ(derive_seed(42, {1, 2, 3}), derive_seed(42, {1, 2, 3}));
    EXPECT_NE(derive_seed(42, {1, 2, 3}), derive_seed(43, {1, 2, 3}));
}

TEST(Rng, DeriveSeedSeparatesCoordinateCountsAndOrder) {
    const auto base = 7u;
    std::set<std::uint64_t> seen{derive_seed(base, {}), derive_seed(base, {0}), derive_seed(base, {0, 0}),
                                 derive_seed(base, {0, 0, 0}), derive_seed(base, {1, 0}), derive_seed(base, {0, 1})};
    EXPECT_EQ(seen.size(), 6u);
}

TEST(Rng, DeriveSeedInjectiveOverGridCoordinates) {
    std::set<std::uint64_t> seen;
    std::size_t n = 0;
    for (std::uint64_t b = 0; b < 8; ++b) {
        for (std::uint64_t a = 0; a < 8; ++a) {
            for (std::uint64_t r = 0; r < 64; ++r) {
                seen.insert(derive_seed(0, {b, a, r}));
                ++n;
            }
        }
    }
    EXPECT_EQ(seen.size(), n);
}

TEST(Rng, DeriveSeedRejectsOversizedInput) {
    EXPECT_THROW(derive_seed(0, {1, 2, 3, 4}), std::invalid_argument);
    EXPECT_THROW(derive_seed(0, {std::uint64_t{1} << 20}), std::invalid_argument);
}

TEST(Rng, UniformIndexStaysInRangeAndIsBalanced) {
    Rng rng(3);
    std::vector<int> counts(5, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto v = uniform_index(rng, 5);
        ASSERT_LT(v, 5u);
        ++counts[v];
    }
    for (int c : counts) EXPECT_NEAR(c / double(n), 0.2, 0.01);
    EXPECT_THROW(uniform_index(rng, 0), std::invalid_argument);
}

TEST(Rng, Uniform01IsHalfOpen) {
    Rng rng(5);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(rng);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(Rng, StandardNormalMoments) {
    Rng rng(11);
    const int n = 200000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(rng);
        ASSERT_TRUE(std::isfinite(z));
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutationAndReplays) {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto a = v;
    auto b = v;
    Rng r1(9);
    Rng r2(9);
    shuffle(a.begin(), a.end(), r1);
    shuffle(b.begin(), b.end(), r2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, v);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, v);
}
