#include "wgqd/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace wgqd;

// Known-answer vectors from the Random123 reference distribution.
TEST(Philox, KnownAnswerVectors) {
    const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero[0], 0x6627e8d5u);
    EXPECT_EQ(zero[1], 0xe169c58du);
    EXPECT_EQ(zero[2], 0xbc57ac4cu);
    EXPECT_EQ(zero[3], 0x9b00dbd8u);

    const auto ones = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(ones[0], 0x408f276du);
    EXPECT_EQ(ones[1], 0x41c83b0eu);
    EXPECT_EQ(ones[2], 0xa20bc7c6u);
    EXPECT_EQ(ones[3], 0x6d5451fdu);

    const auto pi_digits = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                             {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(pi_digits[0], 0xd16cfe09u);
    EXPECT_EQ(pi_digits[1], 0x94fdccebu);
    EXPECT_EQ(pi_digits[2], 0x5001e420u);
    EXPECT_EQ(pi_digits[3], 0x24126ea1u);
}

TEST(Rng, DeterministicAndStreamSeparated) {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool any_c_differs = false, any_d_differs = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u32();
        EXPECT_EQ(va, b.next_u32());
        any_c_differs |= va != c.next_u32();
        any_d_differs |= va != d.next_u32();
    }
    EXPECT_TRUE(any_c_differs);
    EXPECT_TRUE(any_d_differs);
}

TEST(Rng, UniformRangeAndMoments) {
    Rng rng(1);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.5, 5.0 / std::sqrt(12.0 * n));
    EXPECT_NEAR(var, 1.0 / 12.0, 0.002);
}

TEST(Rng, ExponentialMean) {
    Rng rng(2);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(4.0);
    EXPECT_NEAR(sum / n, 0.25, 5 * 0.25 / std::sqrt(double(n)));
    EXPECT_TRUE(std::isinf(rng.exponential(0.0)));
}

TEST(Rng, NormalMoments) {
    Rng rng(3);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(double(n)));
    EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(Rng, PoissonMeanVariance) {
    Rng rng(4);
    for (double lambda : {0.4, 3.0, 50.0}) {
        const int n = 50000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = double(rng.poisson(lambda));
            sum += k;
            sum2 += k * k;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double se = std::sqrt(lambda / n);
        EXPECT_NEAR(mean, lambda, 5 * se) << "lambda=" << lambda;
        EXPECT_NEAR(var / lambda, 1.0, 0.1) << "lambda=" << lambda;
    }
    EXPECT_EQ(rng.poisson(0.0), 0u);
}
