#include <gtest/gtest.h>

#include <cmath>

#include "fslln/random.hpp"
#include "fslln/slln_conditions.hpp"

using namespace fslln;

namespace {
const RegimeParams kStudy{1.6, 0.4, 2};
}

TEST(RegimeClassifier, Examples) {
    auto v = theorem2_regime(kStudy);
    EXPECT_EQ(v.outcome, RegimeOutcome::HoldsCaseI);
    EXPECT_NEAR(v.alpha_interval.lower, 1.0 / 1.2, 1e-15);
    EXPECT_NEAR(v.alpha_interval.upper, 2.5, 1e-15);

    v = theorem2_regime({3.0, 0.5, 2});
    EXPECT_EQ(v.outcome, RegimeOutcome::HoldsCaseII);
    EXPECT_NEAR(v.alpha_interval.lower, 1.0 / 1.5, 1e-15);
    EXPECT_NEAR(v.alpha_interval.upper, 2.0, 1e-15);

    v = theorem2_regime({1.0, 0.6, 2});
    EXPECT_EQ(v.outcome, RegimeOutcome::NotCovered);
    EXPECT_TRUE(v.alpha_interval.empty());
}

TEST(RegimeClassifier, GammaZeroGivesUnboundedInterval) {
    const auto v = theorem2_regime({1.0, 0.0, 2});
    EXPECT_EQ(v.outcome, RegimeOutcome::HoldsCaseI);
    EXPECT_TRUE(v.gamma_zero);
    EXPECT_DOUBLE_EQ(v.alpha_interval.lower, 1.0);
    EXPECT_TRUE(std::isinf(v.alpha_interval.upper));
}

TEST(RegimeClassifier, InvalidParamsRejected) {
    EXPECT_THROW(theorem2_regime({0.0, 0.1, 2}), DomainError);
    EXPECT_THROW(theorem2_regime({1.0, -0.1, 2}), DomainError);
    EXPECT_THROW(theorem2_regime({1.0, 0.1, 0}), DomainError);
    EXPECT_THROW(theorem2_regime({INFINITY, 0.1, 2}), DomainError);
}

TEST(VarianceSeries, Examples) {
    EXPECT_TRUE(lemma1_series_converges(1.0, kStudy));
    EXPECT_FALSE(lemma1_series_converges(0.5, kStudy));
    EXPECT_FALSE(lemma1_series_converges(1.0 / 1.25, {1.5, 0.25, 2}));
    EXPECT_TRUE(lemma1_series_converges(0.7, {3.0, 0.5, 2}));
    EXPECT_THROW(lemma1_series_converges(0.0, kStudy), DomainError);
}

TEST(IncrementSeries, Examples) {
    EXPECT_TRUE(lemma2_series_converge(2.0, kStudy));
    EXPECT_FALSE(lemma2_series_converge(3.0, kStudy));
    EXPECT_FALSE(lemma2_series_converge(2.5, kStudy));
    for (double a : {0.1, 1.0, 100.0}) EXPECT_TRUE(lemma2_series_converge(a, {1.0, 0.0, 2}));
}

TEST(VarianceBound, Examples) {
    EXPECT_NEAR(variance_upper_bound(10.0, kStudy, 1.0), 0.12333346307821094, 1e-15);
    for (double mu : {1.0, 7.0, 42.0})
        for (int d : {1, 2, 3}) EXPECT_NEAR(variance_upper_bound(mu, {double(d), 0.0, d}, 1.0), 4.0 * std::pow(mu, -d), 1e-14);
    double prev = INFINITY;
    for (double mu = 10.0; mu <= 300.0; mu += 0.5) {
        const double b = variance_upper_bound(mu, kStudy, 1.0);
        ASSERT_LE(b, prev);
        prev = b;
    }
}

TEST(VarianceBound, FittedConstantAttainsVariance) {
    for (double var : {1e-4, 0.05, 2.8})
        for (double mu : {10.0, 100.0}) {
            const double c = fit_bound_constant(var, mu, kStudy);
            EXPECT_NEAR(variance_upper_bound(mu, kStudy, c), var, 1e-12 * var);
        }
}

TEST(SeriesProbe, Examples) {
    const auto sq = numeric_series_probe([](long long n) { return 1.0 / (double(n) * double(n)); }, 100000);
    EXPECT_NEAR(sq.tail_slope, -2.0, 1e-6);
    EXPECT_FALSE(sq.likely_divergent);
    EXPECT_NEAR(sq.partial_sum, std::numbers::pi * std::numbers::pi / 6, 1e-4);
    const auto harm = numeric_series_probe([](long long n) { return 1.0 / double(n); }, 100000);
    EXPECT_NEAR(harm.tail_slope, -1.0, 1e-6);
    EXPECT_TRUE(harm.likely_divergent);
    const auto lem = numeric_series_probe([](long long n) { return variance_upper_bound(double(n), kStudy, 1.0); }, 10000000);
    EXPECT_NEAR(lem.tail_slope, -1.2, 0.01);
    EXPECT_FALSE(lem.likely_divergent);
    EXPECT_TRUE(lemma1_series_converges(1.0, kStudy));
}

TEST(SeriesProbe, Errors) {
    EXPECT_THROW(numeric_series_probe([](long long) { return 1.0; }, 10), DomainError);
    EXPECT_THROW(numeric_series_probe([](long long n) { return n == 50 ? 0.0 : 1.0; }, 100), DomainError);
}

TEST(Consistency, RandomSweep) {
    GaussianStream rng(2718);
    int inside = 0, outside = 0;
    for (int i = 0; i < 20000; ++i) {
        const RegimeParams p{0.05 + 5.0 * rng.uniform(), rng.uniform() < 0.1 ? 0.0 : 3.0 * rng.uniform(),
                             1 + static_cast<int>(3 * rng.uniform())};
        const auto v = theorem2_regime(p);
        ASSERT_EQ(v.outcome != RegimeOutcome::NotCovered, !v.alpha_interval.empty());
        const double alpha = 0.01 + 10.0 * rng.uniform();
        const bool l1 = lemma1_series_converges(alpha, p);
        const bool l2 = lemma2_series_converge(alpha, p);
        if (v.alpha_interval.contains(alpha)) {
            ++inside;
            ASSERT_TRUE(l1 && l2) << p.beta << " " << p.gamma << " " << p.d << " " << alpha;
        } else if (v.alpha_interval.empty() || alpha < v.alpha_interval.lower || alpha > v.alpha_interval.upper) {
            ++outside;
            ASSERT_FALSE(l1 && l2) << p.beta << " " << p.gamma << " " << p.d << " " << alpha;
        }
    }
    EXPECT_GT(inside, 1000);
    EXPECT_GT(outside, 1000);
}
