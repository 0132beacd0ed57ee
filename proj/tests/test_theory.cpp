#include "mlcomp/theory.hpp"
#include "mlcomp/environment.hpp"
#include "mlcomp/metrics.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>

using namespace mlcomp;

namespace {

// Direct softmax expectation on a correctness vector with k ones out of m.
double brute_force_expectation(std::size_t k, std::size_t m, double alpha) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double q = j < k ? 1.0 : 0.0;
        num += q * std::exp(alpha * q);
        den += std::exp(alpha * q);
    }
    return num / den;
}

}  // namespace

TEST(ClosedForm, IdentitiesAndEndpoints) {
    for (double z : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0}) EXPECT_NEAR(k_closed_form(z, 0.0), z, 1e-15);
    for (double a : {0.0, 0.5, 3.0, 700.0, 1e5}) {
        EXPECT_EQ(k_closed_form(0.0, a), 0.0);
        EXPECT_EQ(k_closed_form(1.0, a), 1.0);
    }
    EXPECT_THROW(k_closed_form(1.5, 1.0), std::domain_error);
    EXPECT_THROW(k_closed_form(0.5, -1.0), std::domain_error);
}

TEST(ClosedForm, MatchesSoftmaxExpectation) {
    const double e = std::exp(1.0);
    const auto p = selection_probabilities(std::vector<double>{1, 1, 0}, 1.0);
    const double brute = p[0] + p[1];
    EXPECT_NEAR(brute, 2 * e / (2 * e + 1), 1e-15);
    EXPECT_NEAR(k_closed_form(2.0 / 3.0, 1.0), brute, 1e-15);
    EXPECT_NEAR(brute, 0.844638, 1e-6);
    for (std::size_t m = 2; m <= 8; ++m) {
        for (std::size_t k = 0; k <= m; ++k) {
            for (double a : {0.0, 0.5, 1.0, 2.0, 4.0}) {
                ASSERT_NEAR(k_closed_form(double(k) / double(m), a), brute_force_expectation(k, m, a), 1e-14);
            }
        }
    }
}

TEST(ClosedForm, StrictlyIncreasing) {
    for (double a : {0.1, 1.0, 5.0}) {
        double prev = 0.0;
        for (int i = 1; i < 100; ++i) {
            const double v = k_closed_form(i / 100.0, a);
            ASSERT_GT(v, prev);
            prev = v;
        }
    }
    for (double z : {0.05, 0.5, 0.95}) {
        double prev = k_closed_form(z, 0.0);
        for (int i = 1; i <= 30; ++i) {
            const double v = k_closed_form(z, 0.25 * i);
            ASSERT_GT(v, prev);
            prev = v;
        }
    }
}

TEST(DynamicsSummary, ExactMoments) {
    // Z values 0, 1/2, 1/2, 1 for M = 2: mean 1/2, variance 1/8.
    const auto s = DynamicsSummary::from_counts(2, 1.0, {1, 2, 1});
    EXPECT_EQ(s.mu(), 0.5);
    EXPECT_EQ(s.var(), 0.125);
    EXPECT_EQ(s.n_samples(), 4u);
    EXPECT_EQ(s.z_samples(), (std::vector<double>{0.0, 0.5, 0.5, 1.0}));
    const auto t = DynamicsSummary::from_samples(4, 1.0, std::vector<double>{0.25, 0.75, 0.75});
    EXPECT_EQ(t.counts(), (std::vector<std::uint64_t>{0, 1, 0, 2, 0}));
}

TEST(DynamicsSummary, Errors) {
    EXPECT_THROW(DynamicsSummary::from_counts(1, 1.0, {1, 1}), std::invalid_argument);
    EXPECT_THROW(DynamicsSummary::from_counts(3, 1.0, {1, 1}), std::invalid_argument);
    EXPECT_THROW(DynamicsSummary::from_counts(2, 1.0, {0, 0, 0}), std::invalid_argument);
    EXPECT_THROW(DynamicsSummary::from_samples(3, 1.0, std::vector<double>{0.5}), std::invalid_argument);
    EXPECT_THROW(DynamicsSummary::from_samples(3, 1.0, std::vector<double>{1.2}), std::invalid_argument);
}

TEST(ClosedFormQoe, ZeroAlphaAndPerfectMarket) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 9);
        const auto s = DynamicsSummary::from_counts(m, 0.0, random_lattice_counts(m, 50, rng()));
        ASSERT_DOUBLE_EQ(qoe_from_lemma(s), s.mu());
    }
    EXPECT_EQ(qoe_from_lemma(DynamicsSummary::from_counts(5, 3.0, {0, 0, 0, 0, 0, 9})), 1.0);
}

TEST(ClosedFormQoe, AgreesWithBruteForceAndMetrics) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 6);
        const std::size_t n = 50;
        std::vector<std::size_t> labels(n);
        std::vector<std::size_t> preds(n * m);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = uniform_index(rng, 3);
            for (std::size_t j = 0; j < m; ++j) preds[i * m + j] = uniform_index(rng, 3);
        }
        const PredictionTable t(m, 3, labels, preds);
        const auto q = QualityFunction::correctness();
        const double alpha = uniform_real(rng, 0.0, 5.0);
        const auto s = DynamicsSummary::from_samples(m, alpha, average_qualities(t, q));
        ASSERT_NEAR(qoe_from_lemma(s), qoe(t, q, alpha), 1e-12);
        ASSERT_NEAR(qoe_brute_force(s), qoe_from_lemma(s), 1e-12);
    }
}

TEST(QoeBounds, ZeroAlphaAndDegenerateRows) {
    const std::vector<double> q{0.2, 0.9, 0.0, 1.5, 0.3, 0.3};
    const auto b0 = theorem3_bounds(q, 3, 0.0);
    EXPECT_NEAR(b0.value, b0.lower, 1e-15);
    const std::vector<double> same{0.4, 0.4, 0.4, 2.0, 2.0, 2.0};
    const auto b = theorem3_bounds(same, 3, 2.5);
    EXPECT_NEAR(b.lower, b.value, 1e-15);
    EXPECT_NEAR(b.value, b.upper, 1e-15);
    EXPECT_THROW(theorem3_bounds(std::vector<double>{1.0, 2.0, 3.0}, 2, 1.0), std::invalid_argument);
    EXPECT_THROW(theorem3_bounds(std::vector<double>{1.0, -2.0}, 2, 1.0), std::domain_error);
}

TEST(QoeBounds, RandomSweepWithinBoundsAndMonotone) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + uniform_index(rng, 8);
        const std::size_t n = 1 + uniform_index(rng, 20);
        std::vector<double> q(n * m);
        for (auto& v : q) v = uniform01(rng) < 0.2 ? 0.0 : uniform_real(rng, 0.0, 3.0);
        double prev = -1.0;
        for (double a : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            const auto b = theorem3_bounds(q, m, a);
            ASSERT_LE(b.lower, b.value + 1e-12);
            ASSERT_LE(b.value, b.upper + 1e-12);
            ASSERT_GE(b.value, prev - 1e-12);
            prev = b.value;
        }
    }
}

TEST(ConditionConstants, Identities) {
    for (double a : {0.1, 1.0, 3.0}) EXPECT_NEAR(theorem1_constants(2, a, 0.3, 0.6).c1, 1.0, 1e-15);
    EXPECT_EQ(theorem1_constants(5, 1.0, 0.4, 0.4).c_alpha, 0.0);
    EXPECT_EQ(theorem1_constants(2, 1.0, 0.4, 0.4).c_alpha, 0.0);
    EXPECT_NEAR(theorem1_constants(3, std::log(2.0), 0.3, 0.5).c1, 0.8, 1e-15);
}

TEST(ConditionConstants, OrderingAndSandwich) {
    Rng rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 12);
        const double a = uniform_real(rng, 0.01, 10.0);
        const auto c = theorem1_constants(m, a, uniform_real(rng, 0.01, 0.99), uniform_real(rng, 0.01, 0.99));
        ASSERT_LE(c.c_low, c.c_upp * (1 + 1e-15));
        ASSERT_NEAR(c.c1, c.c_low / c.c_upp, 1e-12);
        ASSERT_LE(c.c1, 1.0 + 1e-15);
        const double ea = std::exp(a);
        for (std::size_t k = 1; k < m; ++k) {
            const double z = double(k) / double(m);
            const double mid = (ea - 1.0) / (z * ea + 1.0 - z);
            ASSERT_LE(c.c_low, mid * (1 + 1e-12));
            ASSERT_LE(mid, c.c_upp * (1 + 1e-12));
        }
    }
}

TEST(ConditionConstants, AlphaThresholdCases) {
    // M = 3, mu1 = 0.5 (a1 = 0.25), mu2 = 0.9 (a2 = 0.09):
    // num = 2(0.25) - 0.09 = 0.41, den = 2(0.09) - 0.25 = -0.07 -> no finite threshold.
    EXPECT_TRUE(std::isinf(theorem1_constants(3, 1.0, 0.5, 0.9).c_alpha));
    // M = 3, mu1 = 0.2 (a1 = 0.16), mu2 = 0.4 (a2 = 0.24): ratio 0.08 / 0.32 <= 1 -> 0.
    EXPECT_EQ(theorem1_constants(3, 1.0, 0.2, 0.4).c_alpha, 0.0);
    // M = 4, mu1 = 0.5 (a1 = 0.25), mu2 = 0.7 (a2 = 0.21): ln(0.54 / 0.38).
    EXPECT_NEAR(theorem1_constants(4, 1.0, 0.5, 0.7).c_alpha, std::log(0.54 / 0.38), 1e-12);
}

TEST(ConditionConstants, Errors) {
    EXPECT_THROW(theorem1_constants(1, 1.0, 0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(theorem1_constants(3, 0.0, 0.5, 0.5), std::invalid_argument);
    EXPECT_THROW(theorem1_constants(3, 1.0, 0.0, 0.5), std::domain_error);
    EXPECT_THROW(theorem1_constants(3, 1.0, 0.5, 1.0), std::domain_error);
}

TEST(VarianceCondition, IdenticalDynamics) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + uniform_index(rng, 8);
        const auto s = DynamicsSummary::from_counts(m, uniform_real(rng, 0.1, 6.0),
                                                   random_lattice_counts(m, 30, rng()));
        if (s.mu() <= 0.0 || s.mu() >= 1.0) continue;
        const auto v = theorem1_condition(s, s);
        ASSERT_NEAR(v.constants.c2, (1.0 - v.constants.c1) * s.mu() * (1.0 - s.mu()), 1e-12);
        ASSERT_GE(v.constants.c2, -1e-15);
        ASSERT_EQ(v.qoe1, v.qoe2);
        ASSERT_EQ(v.proof_condition, s.var() >= v.constants.c1 * s.var() + v.constants.c2);
    }
}

TEST(VarianceCondition, Preconditions) {
    const auto a = DynamicsSummary::from_counts(3, 1.0, {1, 1, 1, 0});
    const auto b = DynamicsSummary::from_counts(3, 1.0, {0, 1, 1, 1});
    const auto c = DynamicsSummary::from_counts(3, 2.0, {0, 1, 1, 1});
    const auto d = DynamicsSummary::from_counts(4, 1.0, {0, 1, 1, 1, 0});
    EXPECT_NO_THROW(theorem1_condition(a, b));
    EXPECT_THROW(theorem1_condition(b, a), std::invalid_argument);
    EXPECT_THROW(theorem1_condition(a, c), std::invalid_argument);
    EXPECT_THROW(theorem1_condition(a, d), std::invalid_argument);
}

TEST(VarianceCondition, SoundOnRandomPairs) {
    for (std::size_t m : {3u, 4u, 5u}) {
        Rng rng(100 + m);
        std::size_t verdicts = 0;
        std::size_t false_up = 0;
        std::size_t false_down = 0;
        for (int trial = 0; trial < 3000; ++trial) {
            const double alpha = uniform_real(rng, 0.05, 8.0);
            auto s1 = DynamicsSummary::from_counts(m, alpha, random_lattice_counts(m, 20, rng()));
            auto s2 = DynamicsSummary::from_counts(m, alpha, random_lattice_counts(m, 20, rng()));
            if (s1.mu() <= 0.0 || s1.mu() >= 1.0 || s2.mu() <= 0.0 || s2.mu() >= 1.0) continue;
            if (s2.mu() < s1.mu()) std::swap(s1, s2);
            const auto v = theorem1_condition(s1, s2);
            if (v.verdict) {
                ++verdicts;
                ASSERT_LE(qoe_from_lemma(s2), qoe_from_lemma(s1) + 1e-12);
            } else if (v.qoe2 > v.qoe1) {
                ++false_up;
            } else {
                ++false_down;
            }
        }
        EXPECT_GT(verdicts, 0u) << "M=" << m;
        EXPECT_GT(false_up, 0u) << "M=" << m;
        EXPECT_GT(false_down, 0u) << "M=" << m;
    }
}

TEST(SoundnessSweep, ReportsCounts) {
    const auto r = theorem1_soundness_sweep(4, 500, 7);
    EXPECT_EQ(r.pairs, 500u);
    EXPECT_EQ(r.violations, 0u);
    EXPECT_EQ(r.pairs, r.verdict_true + r.false_with_decrease + r.false_with_increase);
    const auto again = theorem1_soundness_sweep(4, 500, 7);
    EXPECT_EQ(again.verdict_true, r.verdict_true);
}

TEST(TheoryReport, JsonShape) {
    const auto a = DynamicsSummary::from_counts(3, 1.0, {1, 1, 1, 0});
    const auto b = DynamicsSummary::from_counts(3, 1.0, {0, 1, 1, 1});
    const auto j = nlohmann::json::parse(theory_report_json(a, b));
    EXPECT_EQ(j.at("n_predictors"), 3);
    EXPECT_TRUE(j.at("constants").contains("c1"));
    EXPECT_TRUE(j.at("verdict").is_boolean());
    EXPECT_NEAR(j.at("dynamics_1").at("qoe_closed_form").get<double>(),
                j.at("dynamics_1").at("qoe_brute_force").get<double>(), 1e-12);
}
