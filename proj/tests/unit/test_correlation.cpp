#include "wgqd/correlation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace wgqd;

namespace {

TimestampStream poisson_stream(double rate, double duration, std::uint64_t seed) {
    return add_background(TimestampStream("empty", {}, duration), rate, seed);
}

TimestampStream random_small_stream(Rng& rng, double duration) {
    const int n = int(rng.uniform(0.0, 100.0));
    std::vector<double> t;
    for (int i = 0; i < n; ++i) t.push_back(rng.uniform(0.0, duration));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return {"r", std::move(t), duration};
}

}  // namespace

TEST(Correlate, EmptyStreamsGiveZeroHistogram) {
    const TimestampStream empty("e", {}, 1.0);
    const auto s = poisson_stream(100.0, 1.0, 3);
    for (const auto& h :
         {correlate(empty, s, 1e-2, 1e-3), correlate(s, empty, 1e-2, 1e-3)}) {
        for (auto c : h.counts) EXPECT_EQ(c, 0);
    }
}

TEST(Correlate, MatchesBruteForceBitExact) {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = random_small_stream(rng, 1.0);
        const auto b = random_small_stream(rng, 1.0);
        const double bin = 7.3e-3, window = 0.11;
        const auto fast = correlate(a, b, window, bin);
        const auto slow = correlate_brute_force(a, b, window, bin);
        ASSERT_EQ(fast.counts, slow.counts) << "trial " << trial;
    }
}

TEST(Correlate, MirroredArgumentsMirrorTheHistogram) {
    Rng rng(77);
    const auto a = random_small_stream(rng, 1.0);
    const auto b = random_small_stream(rng, 1.0);
    const auto ab = correlate(a, b, 0.1, 5e-3);
    const auto ba = correlate(b, a, 0.1, 5e-3);
    const int n = int(ab.counts.size());
    for (int i = 0; i < n; ++i) EXPECT_EQ(ab.counts[size_t(i)], ba.counts[size_t(n - 1 - i)]);
}

TEST(Correlate, IndependentPoissonPairExpectation) {
    const double r1 = 2e4, r2 = 3e4, duration = 2.0;
    const auto a = poisson_stream(r1, duration, 5);
    const auto b = poisson_stream(r2, duration, 6);
    const double bin = 1e-6;
    const auto hist = correlate(a, b, 50e-6, bin);
    const double expected = r1 * r2 * bin * duration;
    int within = 0;
    for (auto c : hist.counts) {
        if (std::abs(double(c) - expected) <= 5.0 * std::sqrt(expected)) ++within;
    }
    EXPECT_GE(within, int(hist.counts.size()) - 1);
}

TEST(Normalize, FlatForIndependentStreamsAndZeroSafe) {
    const auto a = poisson_stream(2e4, 2.0, 7);
    const auto b = poisson_stream(2e4, 2.0, 8);
    const auto curve = normalize(correlate(a, b, 50e-6, 1e-6));
    int within = 0, total = 0;
    for (const auto& p : curve.points) {
        ++total;
        if (std::abs(p.g2 - 1.0) <= 3.0 * p.sigma) ++within;
    }
    EXPECT_GE(double(within), 0.99 * double(total) - 1.0);

    G2Histogram zero;
    zero.half_bins = 5;
    zero.bin_width = 1e-6;
    zero.counts.assign(11, 0);
    zero.rate1 = zero.rate2 = 0.0;
    zero.duration = 1.0;
    for (const auto& p : normalize(zero).points) {
        EXPECT_EQ(p.g2, 0.0);
        EXPECT_EQ(p.sigma, 0.0);
    }
}

TEST(Normalize, RelativeErrorShrinksWithDuration) {
    auto mean_relative_error = [](double duration, std::uint64_t seed) {
        const auto a = poisson_stream(3e4, duration, seed);
        const auto b = poisson_stream(3e4, duration, seed + 1);
        const auto curve = normalize(correlate(a, b, 20e-6, 1e-6));
        double acc = 0.0;
        int n = 0;
        for (const auto& p : curve.points) {
            if (p.g2 > 0) {
                acc += p.sigma / p.g2;
                ++n;
            }
        }
        return acc / n;
    };
    const double e1 = mean_relative_error(1.0, 11);
    const double e2 = mean_relative_error(2.0, 13);
    EXPECT_NEAR(e1 / e2, std::sqrt(2.0), 0.2);
}

TEST(Fit, RecoversExactModelParameters) {
    const double b_true = 0.96, tau_true = 23.9e-9;
    G2Curve curve;
    for (int i = -60; i <= 60; ++i) {
        G2Point p;
        p.tau = i * 2e-9;
        p.g2 = g2_two_level(p.tau, b_true, tau_true);
        p.counts = 1000;
        p.norm = 1000.0;
        curve.points.push_back(p);
    }
    const G2Fit fit = fit_g2(curve);
    EXPECT_TRUE(fit.converged);
    EXPECT_NEAR(fit.b, b_true, 1e-9);
    EXPECT_NEAR(fit.tau_l, tau_true, 1e-9 * tau_true);
    EXPECT_LT(fit.residual_norm, 1e-10);
    EXPECT_NEAR(fit.g2_zero_raw, 1.0 - b_true, 1e-9);
}

TEST(Fit, FlatCurveYieldsZeroDip) {
    G2Curve curve;
    for (int i = -30; i <= 30; ++i) {
        G2Point p;
        p.tau = i * 1e-9;
        p.g2 = 1.0;
        p.counts = 500;
        p.norm = 500.0;
        curve.points.push_back(p);
    }
    const G2Fit fit = fit_g2(curve);
    EXPECT_NEAR(fit.b, 0.0, 1e-6);
    EXPECT_FALSE(fit.warnings.empty());  // tau_l unconstrained
}

TEST(Fit, RequiresEnoughBins) {
    G2Curve tiny;
    for (int i = 0; i < 5; ++i) {
        G2Point p;
        p.tau = i * 1e-9;
        p.g2 = 1.0;
        p.norm = 1.0;
        tiny.points.push_back(p);
    }
    EXPECT_THROW(fit_g2(tiny), std::invalid_argument);
}

TEST(EndToEnd, AntibunchingPipelineRecoversTimeConstant) {
    const double k_dec = 1.0 / 23.9e-9;
    const double k_exc = k_dec / 50.0;
    EmitterParams params;
    params.pump_rate = k_exc;
    params.decay_rate = k_dec;
    const double duration = 1.25;  // >= 1e6 emitted photons
    const auto emitted = simulate_emission(params, duration, 2025);
    ASSERT_GT(emitted.size(), 1000000u);
    const auto [ch1, ch2] = hbt_split(emitted, 2025);
    const auto curve = normalize(correlate(ch1, ch2, 150e-9, 2e-9));
    const G2Fit fit = fit_g2(curve);
    const double tau_expected = 1.0 / (k_exc + k_dec);
    EXPECT_NEAR(fit.tau_l, tau_expected, 0.1 * tau_expected);
    EXPECT_LT(fit.g2_zero_raw, 0.1);
}

TEST(EndToEnd, BackgroundRaisesRawDipMonotonically) {
    const double k_dec = 1.0 / 23.9e-9;
    EmitterParams params;
    params.pump_rate = k_dec / 50.0;
    params.decay_rate = k_dec;
    const double duration = 0.6;
    const auto emitted = simulate_emission(params, duration, 31);
    const double signal_rate = emitted.mean_rate();

    std::vector<double> raw_g0;
    std::vector<double> corrected_g0;
    for (double frac : {0.0, 0.3, 0.6}) {
        const auto with_bg = frac > 0
                                 ? add_background(emitted, frac * signal_rate, 33)
                                 : emitted;
        const auto [c1, c2] = hbt_split(with_bg, 35);
        const G2Fit fit = fit_g2(normalize(correlate(c1, c2, 150e-9, 2e-9)));
        raw_g0.push_back(fit.g2_zero_raw);
        const double rho = estimate_rho(signal_rate, frac * signal_rate);
        corrected_g0.push_back(background_correct(fit, rho).g2_zero_corrected);
    }
    EXPECT_LT(raw_g0[0] + 0.05, raw_g0[1]);
    EXPECT_LT(raw_g0[1] + 0.05, raw_g0[2]);
    // Supplying the exact purity recovers the emitter-only dip; the tolerance
    // grows with 1/rho^2 error amplification.
    EXPECT_NEAR(corrected_g0[1], raw_g0[0], 0.06);
    EXPECT_NEAR(corrected_g0[2], raw_g0[0], 0.10);
}

TEST(BackgroundCorrect, IdentityAtUnityPurityAndKnownPairs) {
    G2Fit fit;
    fit.b = 0.5;
    fit.g2_zero_raw = 0.5;
    EXPECT_DOUBLE_EQ(background_correct(fit, 1.0).g2_zero_corrected, 0.5);

    // raw 0.43 -> corrected 0.04 implies rho^2 = 0.57/0.96.
    const double rho1 = std::sqrt((1.0 - 0.43) / (1.0 - 0.04));
    EXPECT_NEAR(rho1, 0.771, 1e-3);
    G2Fit f1;
    f1.g2_zero_raw = 0.43;
    EXPECT_NEAR(background_correct(f1, rho1).g2_zero_corrected, 0.04, 1e-12);

    // raw 0.55 -> corrected 0.08 implies rho ~ 0.700.
    const double rho2 = std::sqrt((1.0 - 0.55) / (1.0 - 0.08));
    EXPECT_NEAR(rho2, 0.700, 1e-3);
    G2Fit f2;
    f2.g2_zero_raw = 0.55;
    EXPECT_NEAR(background_correct(f2, rho2).g2_zero_corrected, 0.08, 1e-12);

    EXPECT_THROW(background_correct(f2, 0.0), std::invalid_argument);
}

TEST(BackgroundCorrect, CurveCorrectionInvertsDilution) {
    const double b = 0.9, tau_l = 20e-9, rho = 0.8;
    G2Curve diluted;
    for (int i = -40; i <= 40; ++i) {
        G2Point p;
        p.tau = i * 1.5e-9;
        p.g2 = g2_background_diluted(p.tau, b, tau_l, rho);
        p.sigma = 0.01;
        p.norm = 1.0;
        diluted.points.push_back(p);
    }
    const G2Curve corrected = background_correct(diluted, rho);
    for (std::size_t i = 0; i < corrected.points.size(); ++i) {
        EXPECT_NEAR(corrected.points[i].g2,
                    g2_two_level(corrected.points[i].tau, b, tau_l), 1e-12);
    }
    // The inverse-direction composite model makes the same mapping explicit.
    EXPECT_NEAR(g2_composite_inverse(0.0, b * rho * rho, tau_l, rho), 1.0 - b, 1e-12);
}

TEST(EstimateRho, KnownValues) {
    EXPECT_DOUBLE_EQ(estimate_rho(100.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(estimate_rho(50.0, 50.0), 0.5);
    EXPECT_NEAR(estimate_rho(4000.0, 1521.0), 0.7245, 1e-4);
    EXPECT_THROW(estimate_rho(0.0, 0.0), std::invalid_argument);
}
