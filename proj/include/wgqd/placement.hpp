#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgqd/rng.hpp"

namespace wgqd {

enum class SiteState { Vacant, Occupied, Neutralized };

struct Site {
    SiteState state = SiteState::Vacant;
    int emitters = 0;  // >= 1 iff Occupied
};

struct IterationRecord {
    std::vector<int> exposed_sites;       // flat indices patterned this iteration
    int newly_filled = 0;
    std::vector<int> emitters_per_site;   // snapshot after the iteration
};

/// Grid of emitter sites tracked through the iterative placement protocol.
class SiteArray {
public:
    SiteArray(int rows = 5, int cols = 5) : rows_(rows), cols_(cols) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("site array must be non-empty");
        sites_.resize(std::size_t(rows) * cols);
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int site_count() const { return rows_ * cols_; }
    const Site& site(int idx) const { return sites_[std::size_t(idx)]; }
    Site& site(int idx) { return sites_[std::size_t(idx)]; }
    const std::vector<Site>& sites() const { return sites_; }
    const std::vector<IterationRecord>& log() const { return log_; }
    int iterations() const { return int(log_.size()); }

    void append_log(IterationRecord rec) { log_.push_back(std::move(rec)); }

private:
    int rows_, cols_;
    std::vector<Site> sites_;
    std::vector<IterationRecord> log_;
};

struct ProtocolParams {
    double lambda = 0.4;                 // mean emitters per exposed aperture
    bool neutralize_multi = false;       // e-beam reset of multi-emitter sites
    double destroy_existing_prob = 0.0;  // per-emitter damage probability per iteration
    // Per-iteration deposition overrides; iteration i uses
    // lambda_schedule[min(i, size-1)] when non-empty, lambda otherwise.
    std::vector<double> lambda_schedule;

    double lambda_for_iteration(int iteration) const {
        if (lambda_schedule.empty()) return lambda;
        const std::size_t idx =
            std::min(std::size_t(iteration), lambda_schedule.size() - 1);
        return lambda_schedule[idx];
    }

    void validate() const {
        if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        for (double l : lambda_schedule)
            if (l < 0.0) throw std::invalid_argument("lambda_schedule entries must be >= 0");
        if (destroy_existing_prob < 0.0 || destroy_existing_prob > 1.0)
            throw std::invalid_argument("destroy_existing_prob must lie in [0,1]");
    }
};

/// Fill probability of one exposed aperture, P(K >= 1) for K ~ Poisson(lambda).
inline double fill_probability(double lambda) { return 1.0 - std::exp(-lambda); }

namespace detail {
inline SiteArray run_iteration_impl(SiteArray state, const ProtocolParams& params, Rng& rng) {
    params.validate();
    const double lambda = params.lambda_for_iteration(state.iterations());
    IterationRecord rec;

    // Multi-occupied sites are reset first when neutralization is on; they
    // rejoin the exposed set for this iteration.
    if (params.neutralize_multi) {
        for (int i = 0; i < state.site_count(); ++i) {
            Site& s = state.site(i);
            if (s.state == SiteState::Occupied && s.emitters > 1) {
                s.state = SiteState::Neutralized;
                s.emitters = 0;
            }
        }
    }

    // Existing emitters at untouched sites may be damaged by the processing.
    if (params.destroy_existing_prob > 0.0) {
        for (int i = 0; i < state.site_count(); ++i) {
            Site& s = state.site(i);
            if (s.state != SiteState::Occupied) continue;
            int survivors = 0;
            for (int e = 0; e < s.emitters; ++e) {
                if (!rng.bernoulli(params.destroy_existing_prob)) ++survivors;
            }
            s.emitters = survivors;
            if (survivors == 0) s.state = SiteState::Vacant;
        }
    }

    for (int i = 0; i < state.site_count(); ++i) {
        Site& s = state.site(i);
        if (s.state == SiteState::Occupied) continue;
        rec.exposed_sites.push_back(i);
        const int k = int(rng.poisson(lambda));
        if (k >= 1) {
            s.state = SiteState::Occupied;
            s.emitters = k;
            ++rec.newly_filled;
        } else {
            s.state = SiteState::Vacant;
        }
    }

    rec.emitters_per_site.reserve(std::size_t(state.site_count()));
    for (int i = 0; i < state.site_count(); ++i)
        rec.emitters_per_site.push_back(state.site(i).emitters);
    state.append_log(std::move(rec));
    return state;
}
}  // namespace detail

/// One expose/fill/record pass over the array.
inline SiteArray run_iteration(SiteArray state, const ProtocolParams& params,
                               std::uint64_t seed) {
    Rng rng(seed, rng_stream::kPlacement);
    return detail::run_iteration_impl(std::move(state), params, rng);
}

struct OccupancyStats {
    double occupied_fraction = 0.0;
    std::optional<double> single_of_occupied;  // absent when nothing is occupied
    double single_of_all = 0.0;
};

inline OccupancyStats occupancy_stats(const SiteArray& state) {
    int occupied = 0, single = 0;
    for (const Site& s : state.sites()) {
        if (s.state == SiteState::Occupied) {
            ++occupied;
            if (s.emitters == 1) ++single;
        }
    }
    OccupancyStats stats;
    stats.occupied_fraction = double(occupied) / state.site_count();
    stats.single_of_all = double(single) / state.site_count();
    if (occupied > 0) stats.single_of_occupied = double(single) / occupied;
    return stats;
}

/// Occupied fraction after k iterations at per-iteration fill probability p.
inline double cumulative_yield(double p, int k) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must lie in [0,1]");
    if (k < 0) throw std::invalid_argument("k must be >= 0");
    return 1.0 - std::pow(1.0 - p, k);
}

/// Smallest k with cumulative yield >= target.
inline int expected_iterations(double p, double target_fraction) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in (0,1]");
    if (target_fraction < 0.0 || target_fraction >= 1.0)
        throw std::invalid_argument("target fraction must lie in [0,1)");
    if (target_fraction <= 0.0) return 0;
    if (p >= 1.0) return 1;
    int k = int(std::ceil(std::log1p(-target_fraction) / std::log1p(-p) - 1e-12));
    while (cumulative_yield(p, k) < target_fraction) ++k;
    while (k > 0 && cumulative_yield(p, k - 1) >= target_fraction) --k;
    return k;
}

struct LambdaEstimate {
    double lambda = 0.0;
    double single_of_occupied = 1.0;  // lambda*e^-lambda / (1 - e^-lambda); -> 1 as lambda -> 0
};

/// Inverts p_fill = 1 - e^-lambda for the Poisson deposition rate.
inline LambdaEstimate estimate_lambda_from_fill(double p_fill) {
    if (!(p_fill >= 0.0 && p_fill < 1.0))
        throw std::invalid_argument("fill probability must lie in [0,1)");
    LambdaEstimate est;
    est.lambda = -std::log1p(-p_fill);
    if (est.lambda > 0.0) {
        est.single_of_occupied = est.lambda * std::exp(-est.lambda) / p_fill;
    }
    return est;
}

struct YieldPoint {
    int iteration = 0;  // 1-based
    double occupied_mean = 0.0;
    double occupied_ci = 0.0;  // 1.96 * standard error over trials
    double single_mean = 0.0;  // single-emitter fraction of all sites
    double single_ci = 0.0;
};

struct YieldCurves {
    std::vector<YieldPoint> points;
    int trials = 0;
    int n_sites = 0;
};

/// Monte Carlo over independent site arrays; per-trial streams derive from
/// (seed, trial index) so trials are order-independent.
inline YieldCurves simulate_protocol(const ProtocolParams& params, int n_sites,
                                     int max_iterations, int trials, std::uint64_t seed) {
    params.validate();
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

    std::vector<std::vector<double>> occupied;
    std::vector<std::vector<double>> single;
    occupied.resize(std::size_t(max_iterations));
    single.resize(std::size_t(max_iterations));
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(seed, rng_stream::indexed(rng_stream::kPlacement, std::uint32_t(trial)));
        SiteArray state(1, n_sites);
        for (int it = 0; it < max_iterations; ++it) {
            state = detail::run_iteration_impl(std::move(state), params, rng);
            const OccupancyStats stats = occupancy_stats(state);
            occupied[std::size_t(it)].push_back(stats.occupied_fraction);
            single[std::size_t(it)].push_back(stats.single_of_all);
        }
    }

    auto summarize = [&](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= double(xs.size());
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var = xs.size() > 1 ? var / double(xs.size() - 1) : 0.0;
        return std::pair<double, double>{mean, 1.96 * std::sqrt(var / double(xs.size()))};
    };

    YieldCurves curves;
    curves.trials = trials;
    curves.n_sites = n_sites;
    for (int it = 0; it < max_iterations; ++it) {
        YieldPoint p;
        p.iteration = it + 1;
        auto [om, oc] = summarize(occupied[std::size_t(it)]);
        auto [sm, sc] = summarize(single[std::size_t(it)]);
        p.occupied_mean = om;
        p.occupied_ci = oc;
        p.single_mean = sm;
        p.single_ci = sc;
        curves.points.push_back(p);
    }
    return curves;
}

}  // namespace wgqd
