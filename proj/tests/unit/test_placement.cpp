#include "wgqd/placement.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace wgqd;

namespace {

SiteArray array_with_counts(const std::vector<int>& emitters, int rows = 5, int cols = 5) {
    SiteArray arr(rows, cols);
    for (std::size_t i = 0; i < emitters.size(); ++i) {
        if (emitters[i] > 0) {
            arr.site(int(i)).state = SiteState::Occupied;
            arr.site(int(i)).emitters = emitters[i];
        }
    }
    return arr;
}

}  // namespace

TEST(RunIteration, ZeroLambdaChangesNothingButLogs) {
    SiteArray state(5, 5);
    ProtocolParams params;
    params.lambda = 0.0;
    const auto next = run_iteration(state, params, 1);
    EXPECT_EQ(next.iterations(), 1);
    EXPECT_EQ(next.log()[0].newly_filled, 0);
    EXPECT_EQ(int(next.log()[0].exposed_sites.size()), 25);
    for (const Site& s : next.sites()) EXPECT_EQ(s.state, SiteState::Vacant);
}

TEST(RunIteration, SaturatingLambdaFillsEverythingMultiply) {
    SiteArray state(5, 5);
    ProtocolParams params;
    params.lambda = 50.0;
    const auto next = run_iteration(state, params, 2);
    for (const Site& s : next.sites()) {
        EXPECT_EQ(s.state, SiteState::Occupied);
        EXPECT_GT(s.emitters, 1);  // P(K=1) ~ 50*e^-50, never observed
    }
}

TEST(RunIteration, FillCountIsBinomial) {
    ProtocolParams params;
    params.lambda = estimate_lambda_from_fill(0.32).lambda;
    const int trials = 400;
    int filled = 0;
    for (int t = 0; t < trials; ++t) {
        SiteArray state(5, 5);
        const auto next = run_iteration(state, params, 1000 + std::uint64_t(t));
        filled += next.log()[0].newly_filled;
    }
    const double n = 25.0 * trials, p = 0.32;
    EXPECT_NEAR(double(filled), n * p, 5.0 * std::sqrt(n * p * (1 - p)));
}

TEST(RunIteration, OccupiedSitesAreNeverReExposed) {
    ProtocolParams params;
    params.lambda = 0.5;
    SiteArray state(5, 5);
    for (int it = 0; it < 6; ++it) {
        state = run_iteration(state, params, 10 + std::uint64_t(it));
    }
    // Once a site reports n emitters it keeps exactly n in every later log.
    const auto& log = state.log();
    for (std::size_t it = 1; it < log.size(); ++it) {
        for (int site = 0; site < 25; ++site) {
            const int before = log[it - 1].emitters_per_site[std::size_t(site)];
            if (before > 0) {
                EXPECT_EQ(log[it].emitters_per_site[std::size_t(site)], before);
            }
        }
        for (int exposed : log[it].exposed_sites) {
            EXPECT_EQ(log[it - 1].emitters_per_site[std::size_t(exposed)], 0);
        }
    }
}

TEST(RunIteration, NeutralizationResetsMultiSites) {
    ProtocolParams params;
    params.lambda = 50.0;
    params.neutralize_multi = true;
    SiteArray state(2, 2);
    state = run_iteration(state, params, 3);  // everything multi-occupied
    const auto again = run_iteration(state, params, 4);
    EXPECT_EQ(int(again.log()[1].exposed_sites.size()), 4);  // all re-exposed
}

TEST(OccupancyStats, PaperExampleFractions) {
    const auto fresh = occupancy_stats(SiteArray(5, 5));
    EXPECT_EQ(fresh.occupied_fraction, 0.0);
    EXPECT_FALSE(fresh.single_of_occupied.has_value());
    EXPECT_EQ(fresh.single_of_all, 0.0);

    // First iteration: 8/25 occupied, 7 of 8 single.
    std::vector<int> first(25, 0);
    for (int i = 0; i < 7; ++i) first[std::size_t(i)] = 1;
    first[7] = 3;
    const auto s1 = occupancy_stats(array_with_counts(first));
    EXPECT_DOUBLE_EQ(s1.occupied_fraction, 0.32);
    EXPECT_DOUBLE_EQ(*s1.single_of_occupied, 0.875);
    EXPECT_DOUBLE_EQ(s1.single_of_all, 0.28);

    // Cumulative: 20/25 occupied, 12 single.
    std::vector<int> second(25, 0);
    for (int i = 0; i < 12; ++i) second[std::size_t(i)] = 1;
    for (int i = 12; i < 20; ++i) second[std::size_t(i)] = 2;
    const auto s2 = occupancy_stats(array_with_counts(second));
    EXPECT_DOUBLE_EQ(s2.occupied_fraction, 0.80);
    EXPECT_DOUBLE_EQ(*s2.single_of_occupied, 0.60);
    EXPECT_DOUBLE_EQ(s2.single_of_all, 0.48);
}

TEST(Analytics, CumulativeYield) {
    EXPECT_DOUBLE_EQ(cumulative_yield(0.55, 0), 0.0);
    EXPECT_DOUBLE_EQ(cumulative_yield(1.0, 1), 1.0);
    EXPECT_GT(cumulative_yield(0.55, 6), 0.99);
    EXPECT_NEAR(cumulative_yield(0.55, 6), 0.99170, 5e-6);
}

TEST(Analytics, ExpectedIterations) {
    EXPECT_EQ(expected_iterations(0.55, 0.99), 6);
    EXPECT_EQ(expected_iterations(0.5, 0.5), 1);
    EXPECT_EQ(expected_iterations(0.32, 0.99), 12);
    EXPECT_EQ(expected_iterations(1.0, 0.99), 1);
    EXPECT_EQ(expected_iterations(0.55, 0.0), 0);
    EXPECT_THROW(expected_iterations(0.0, 0.5), std::invalid_argument);

    // Brute-force cross-check over a parameter sweep.
    for (double p : {0.1, 0.32, 0.55, 0.9}) {
        for (double target : {0.5, 0.9, 0.99, 0.999}) {
            int k = 0;
            while (cumulative_yield(p, k) < target) ++k;
            EXPECT_EQ(expected_iterations(p, target), k) << p << " " << target;
        }
    }
}

TEST(Analytics, LambdaFromFill) {
    EXPECT_DOUBLE_EQ(estimate_lambda_from_fill(0.0).lambda, 0.0);
    EXPECT_DOUBLE_EQ(estimate_lambda_from_fill(0.0).single_of_occupied, 1.0);

    const auto e32 = estimate_lambda_from_fill(0.32);
    EXPECT_NEAR(e32.lambda, 0.3857, 1e-4);
    EXPECT_NEAR(e32.single_of_occupied, 0.820, 1e-3);

    const auto e55 = estimate_lambda_from_fill(0.55);
    EXPECT_NEAR(e55.lambda, 0.7985, 1e-4);
    // lambda*e^-lambda/(1 - e^-lambda) at lambda = 0.7985.
    EXPECT_NEAR(e55.single_of_occupied, 0.6533, 1e-3);

    EXPECT_THROW(estimate_lambda_from_fill(1.0), std::invalid_argument);
}

TEST(Protocol, OccupancyIsMonotoneWithoutDamage) {
    ProtocolParams params;
    params.lambda = 0.6;
    SiteArray state(5, 5);
    double prev = 0.0;
    for (int it = 0; it < 8; ++it) {
        state = run_iteration(state, params, 100 + std::uint64_t(it));
        const double occ = occupancy_stats(state).occupied_fraction;
        EXPECT_GE(occ, prev);
        prev = occ;
    }
}

TEST(Protocol, MonteCarloMatchesClosedForm) {
    ProtocolParams params;
    params.lambda = estimate_lambda_from_fill(0.55).lambda;
    const int trials = 400, sites = 25, iters = 6;
    const auto curves = simulate_protocol(params, sites, iters, trials, 7);
    for (int k = 1; k <= iters; ++k) {
        const double expected = cumulative_yield(0.55, k);
        const double se = std::sqrt(expected * (1 - expected) / double(sites * trials));
        EXPECT_NEAR(curves.points[std::size_t(k - 1)].occupied_mean, expected,
                    std::max(3.0 * se, 1e-12))
            << "iteration " << k;
    }
}

// With neutralization, each site is an independent chain over
// {vacant-or-multi (re-exposed), single (absorbing)}: P(single after k) =
// 1 - (1 - lambda*e^-lambda)^k.
TEST(Protocol, NeutralizationMatchesMarkovChain) {
    ProtocolParams params;
    params.lambda = 0.8;
    params.neutralize_multi = true;
    const double p1 = params.lambda * std::exp(-params.lambda);
    const int trials = 500, sites = 25, iters = 5;
    const auto curves = simulate_protocol(params, sites, iters, trials, 11);
    for (int k = 1; k <= iters; ++k) {
        const double expected = 1.0 - std::pow(1.0 - p1, k);
        const double se = std::sqrt(expected * (1 - expected) / double(sites * trials));
        EXPECT_NEAR(curves.points[std::size_t(k - 1)].single_mean, expected, 3.0 * se)
            << "iteration " << k;
    }
    // Single-emitter fraction rises monotonically toward 1 in expectation.
    for (std::size_t k = 1; k < curves.points.size(); ++k) {
        EXPECT_GE(curves.points[k].single_mean + 3.0 * curves.points[k].single_ci,
                  curves.points[k - 1].single_mean);
    }
}

TEST(Protocol, SingleTrialIsReproducible) {
    ProtocolParams params;
    params.lambda = 0.5;
    params.neutralize_multi = true;
    const auto a = simulate_protocol(params, 25, 6, 1, 42);
    const auto b = simulate_protocol(params, 25, 6, 1, 42);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].occupied_mean, b.points[i].occupied_mean);
        EXPECT_EQ(a.points[i].single_mean, b.points[i].single_mean);
    }
}

TEST(Protocol, LambdaScheduleOverridesPerIteration) {
    ProtocolParams params;
    params.lambda = 50.0;                  // ignored once a schedule is set
    params.lambda_schedule = {0.0, 50.0};  // nothing lands on iteration 0
    SiteArray state(5, 5);
    state = run_iteration(state, params, 21);
    EXPECT_EQ(occupancy_stats(state).occupied_fraction, 0.0);
    state = run_iteration(state, params, 22);
    EXPECT_EQ(occupancy_stats(state).occupied_fraction, 1.0);
    // Schedule clamps to its last entry for later iterations.
    EXPECT_EQ(params.lambda_for_iteration(7), 50.0);

    ProtocolParams bad;
    bad.lambda_schedule = {0.3, -0.1};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Protocol, DestroyProbabilityRemovesEmitters) {
    ProtocolParams params;
    params.lambda = 0.0;
    params.destroy_existing_prob = 1.0;
    auto state = array_with_counts({2, 1, 0, 1}, 2, 2);
    state = run_iteration(state, params, 5);
    for (const Site& s : state.sites()) {
        EXPECT_EQ(s.state, SiteState::Vacant);
        EXPECT_EQ(s.emitters, 0);
    }
}
