#include "generators.hpp"

#include <spectrwm/statistics.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace spectrwm;

TEST(MomentAccumulator, ConstantStream) {
    MomentAccumulator acc(1);
    for (int k = 0; k < 1000; ++k) acc.add(1.0);
    EXPECT_EQ(acc.mean(), 1.0);
    EXPECT_EQ(acc.variance(), 0.0);
    EXPECT_EQ(acc.std_error(), 0.0);
}

TEST(MomentAccumulator, MatchesTwoPassFormulas) {
    testgen::Gen gen(51);
    for (int c = 0; c < testgen::kCases; ++c) {
        const std::size_t count = gen.size(2, 200);
        std::vector<double> xs(count);
        MomentAccumulator acc(1);
        for (auto& x : xs) {
            x = gen.normal(3.0) + 10.0;
            acc.add(x);
        }
        double mean = 0;
        for (double x : xs) mean += x / count;
        double ss = 0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        EXPECT_NEAR(acc.mean(), mean, 1e-12 * std::abs(mean));
        EXPECT_NEAR(acc.variance(), ss / (count - 1), 1e-10 * (1 + ss));
        EXPECT_NEAR(acc.std_error(), std::sqrt(ss / (count - 1) / count), 1e-10);
    }
}

TEST(MomentAccumulator, MergeIsAssociativeAndCommutative) {
    testgen::Gen gen(52);
    for (int c = 0; c < testgen::kCases; ++c) {
        MomentAccumulator a(2), b(2), d(2), all(2);
        for (MomentAccumulator* part : {&a, &b, &d}) {
            const std::size_t k = gen.size(0, 50);
            for (std::size_t s = 0; s < k; ++s) {
                const std::vector<double> x{gen.normal(), gen.normal(5.0) - 2.0};
                part->add(x);
                all.add(x);
            }
        }
        auto left = a;
        left.merge(b);
        left.merge(d);
        auto inner = b;
        inner.merge(d);
        auto right = a;
        right.merge(inner);
        auto swapped = d;
        swapped.merge(a);
        swapped.merge(b);
        for (const auto* m : {&left, &right, &swapped}) {
            ASSERT_EQ(m->count(), all.count());
            for (std::size_t i = 0; i < 2; ++i) {
                EXPECT_NEAR(m->mean(i), all.mean(i), 1e-12 * (1 + std::abs(all.mean(i))));
                EXPECT_NEAR(m->m2(i), all.m2(i), 1e-12 * (1 + all.m2(i)));
            }
        }
    }
}

TEST(MomentAccumulator, RejectsDimensionMismatch) {
    MomentAccumulator a(2), b(3);
    EXPECT_THROW(a.add(std::vector<double>{1.0}), std::invalid_argument);
    EXPECT_THROW(a.merge(b), std::invalid_argument);
}

TEST(BatchMeans, IndependentSamplesAgreeWithNaiveError) {
    testgen::Gen gen(53);
    BatchMeans bm(1, 100);
    MomentAccumulator acc(1);
    for (int k = 0; k < 100000; ++k) {
        const double x = gen.normal();
        bm.add(std::vector<double>{x});
        acc.add(x);
    }
    EXPECT_EQ(bm.batches(), 1000u);
    EXPECT_NEAR(bm.mean(), acc.mean(), 1e-12);
    EXPECT_NEAR(bm.std_error() / acc.std_error(), 1.0, 0.15);
}

TEST(BatchMeans, CorrelatedStreamWidensError) {
    // AR(1) with coefficient 0.9: the asymptotic variance is (1+a)/(1-a) = 19 times the marginal.
    testgen::Gen gen(54);
    BatchMeans bm(1, 2000);
    MomentAccumulator acc(1);
    double x = 0;
    for (int k = 0; k < 200000; ++k) {
        x = 0.9 * x + gen.normal();
        bm.add(std::vector<double>{x});
        acc.add(x);
    }
    EXPECT_NEAR(bm.std_error() / acc.std_error(), std::sqrt(19.0), 1.3);
}

TEST(TimeBatchMeans, SplitsSegmentsAcrossBatches) {
    TimeBatchMeans tb(1, 1.0);
    tb.add(std::vector<double>{2.0}, 1.5);
    tb.add(std::vector<double>{4.0}, 1.5);
    EXPECT_EQ(tb.batches(), 3u);
    EXPECT_DOUBLE_EQ(tb.elapsed(), 3.0);
    EXPECT_DOUBLE_EQ(tb.mean(), 3.0);
    // Batch means 2, 3, 4.
    EXPECT_NEAR(tb.std_error(), std::sqrt(1.0 / 3.0), 1e-12);
}
