#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wgqd/budget.hpp"
#include "wgqd/rng.hpp"

namespace wgqd {

/// Ordered detection/photon event times for one channel, seconds.
class TimestampStream {
public:
    TimestampStream() = default;
    TimestampStream(std::string channel, std::vector<double> times, double duration)
        : channel_(std::move(channel)), times_(std::move(times)), duration_(duration) {
        if (!(duration_ > 0.0)) throw std::invalid_argument("stream duration must be > 0");
        double prev = -1.0;
        for (double t : times_) {
            if (!(t >= 0.0 && t <= duration_))
                throw std::invalid_argument("event time outside [0, duration]");
            if (!(t > prev)) throw std::invalid_argument("event times must be strictly increasing");
            prev = t;
        }
    }

    const std::string& channel() const { return channel_; }
    const std::vector<double>& times() const { return times_; }
    double duration() const { return duration_; }
    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double mean_rate() const { return double(times_.size()) / duration_; }

private:
    std::string channel_;
    std::vector<double> times_;
    double duration_ = 1.0;
};

/// Merge two streams over the same observation window.
inline TimestampStream merge_streams(const TimestampStream& a, const TimestampStream& b,
                                     const std::string& channel = "merged") {
    if (a.duration() != b.duration())
        throw std::invalid_argument("cannot merge streams with different durations");
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.times().begin(), a.times().end(), b.times().begin(), b.times().end(),
               std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return {channel, std::move(out), a.duration()};
}

struct BlinkingParams {
    enum class Model { None, Exponential, TruncatedPowerLaw };

    Model model = Model::None;
    double on_to_off_rate = 0.0;  // 1/s, ON-period termination
    double off_to_on_rate = 0.0;  // 1/s, OFF-period termination (exponential model)
    // Truncated power-law OFF durations, density ~ t^-alpha on [t_min, t_max].
    double alpha = 1.5;
    double t_min = 1e-3;
    double t_max = 10.0;
};

struct EmitterParams {
    double pump_rate = 0.0;            // k_exc, 1/s
    double decay_rate = 0.0;           // k_dec = 1/tau_l, 1/s
    double quantum_efficiency = 1.0;   // photon kept per decay
    BlinkingParams blinking;
    bool initially_on = true;

    double lifetime() const { return 1.0 / decay_rate; }

    void validate() const {
        if (pump_rate < 0.0 || decay_rate < 0.0)
            throw std::invalid_argument("rates must be >= 0");
        if (!(decay_rate > 0.0)) throw std::invalid_argument("decay_rate must be > 0");
        if (quantum_efficiency < 0.0 || quantum_efficiency > 1.0)
            throw std::invalid_argument("quantum_efficiency must lie in [0,1]");
        if (blinking.model != BlinkingParams::Model::None) {
            if (blinking.on_to_off_rate < 0.0 || blinking.off_to_on_rate < 0.0)
                throw std::invalid_argument("blinking rates must be >= 0");
        }
        if (blinking.model == BlinkingParams::Model::TruncatedPowerLaw) {
            if (!(blinking.alpha > 1.0))
                throw std::invalid_argument("power-law alpha must be > 1");
            if (!(blinking.t_max > blinking.t_min && blinking.t_min > 0.0))
                throw std::invalid_argument("power-law needs t_max > t_min > 0");
        }
    }
};

struct DetectorParams {
    double efficiency = 1.0;
    double dead_time = 0.0;        // s
    double jitter_sigma = 0.0;     // s, Gaussian
    double dark_count_rate = 0.0;  // 1/s

    void validate() const {
        if (efficiency < 0.0 || efficiency > 1.0)
            throw std::invalid_argument("efficiency must lie in [0,1]");
        if (dead_time < 0.0 || jitter_sigma < 0.0 || dark_count_rate < 0.0)
            throw std::invalid_argument("detector parameters must be >= 0");
    }
};

namespace detail {

/// Inverse-CDF sample of the truncated power-law t^-alpha on [t_min, t_max].
inline double sample_truncated_power_law(Rng& rng, double alpha, double t_min, double t_max) {
    const double p = 1.0 - alpha;
    const double a = std::pow(t_min, p);
    const double b = std::pow(t_max, p);
    return std::pow(a + rng.uniform() * (b - a), 1.0 / p);
}

/// ON/OFF telegraph; segment durations are drawn lazily in arrival order.
class TelegraphProcess {
public:
    TelegraphProcess(const BlinkingParams& p, bool initially_on, Rng& rng)
        : params_(p), rng_(rng), on_(initially_on) {
        seg_end_ = next_segment_end(0.0);
    }

    bool always_on() const { return params_.model == BlinkingParams::Model::None; }
    bool on() const { return on_; }
    double segment_end() const { return seg_end_; }

    void advance_to(double t) {
        while (seg_end_ <= t) toggle();
    }

    void toggle() {
        on_ = !on_;
        seg_end_ = next_segment_end(seg_end_);
    }

private:
    double next_segment_end(double from) {
        if (always_on()) return std::numeric_limits<double>::infinity();
        double dur;
        if (on_) {
            dur = rng_.exponential(params_.on_to_off_rate);
        } else if (params_.model == BlinkingParams::Model::TruncatedPowerLaw) {
            dur = sample_truncated_power_law(rng_, params_.alpha, params_.t_min, params_.t_max);
        } else {
            dur = rng_.exponential(params_.off_to_on_rate);
        }
        return from + dur;
    }

    const BlinkingParams& params_;
    Rng& rng_;
    bool on_;
    double seg_end_ = 0.0;
};

}  // namespace detail

/// Event-driven two-level emitter. While ON the emitter cycles
/// ground -> excited (Exp(pump_rate)) -> ground (Exp(decay_rate), emitting a
/// photon kept with probability quantum_efficiency). Blinking gates the
/// excitation only: pump waiting time accrues during ON segments, while an
/// already-excited state decays in wall time regardless.
inline TimestampStream simulate_emission(const EmitterParams& params, double duration,
                                         std::uint64_t seed) {
    params.validate();
    if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");

    Rng rng(seed, rng_stream::kEmission);
    std::vector<double> photons;
    if (params.pump_rate > 0.0) {
        photons.reserve(std::size_t(std::min(duration * params.pump_rate, 1e8)) + 16);
        detail::TelegraphProcess telegraph(params.blinking, params.initially_on, rng);
        double t = 0.0;
        while (t < duration) {
            // Consume the pump waiting time across ON segments.
            double wait = rng.exponential(params.pump_rate);
            if (telegraph.always_on()) {
                t += wait;
            } else {
                while (wait > 0.0 && t < duration) {
                    telegraph.advance_to(t);
                    if (!telegraph.on()) {
                        t = telegraph.segment_end();
                        continue;
                    }
                    const double available = telegraph.segment_end() - t;
                    if (wait <= available) {
                        t += wait;
                        wait = 0.0;
                    } else {
                        wait -= available;
                        t = telegraph.segment_end();
                    }
                }
            }
            if (t >= duration) break;
            t += rng.exponential(params.decay_rate);
            if (t >= duration) break;
            if (params.quantum_efficiency >= 1.0 || rng.bernoulli(params.quantum_efficiency)) {
                photons.push_back(t);
            }
        }
    }
    return {"emitter", std::move(photons), duration};
}

/// Balanced beam splitter: each event routes to channel 1 or 2 with
/// probability 1/2. The union of the outputs is exactly the input.
inline std::pair<TimestampStream, TimestampStream> hbt_split(const TimestampStream& stream,
                                                             std::uint64_t seed) {
    Rng rng(seed, rng_stream::kHbtSplit);
    std::vector<double> ch1, ch2;
    ch1.reserve(stream.size() / 2 + 8);
    ch2.reserve(stream.size() / 2 + 8);
    for (double t : stream.times()) {
        (rng.bernoulli(0.5) ? ch1 : ch2).push_back(t);
    }
    return {TimestampStream("ch1", std::move(ch1), stream.duration()),
            TimestampStream("ch2", std::move(ch2), stream.duration())};
}

namespace detail {
inline std::vector<double> poisson_times(Rng& rng, double rate, double duration) {
    std::vector<double> out;
    if (rate > 0.0) {
        double t = rng.exponential(rate);
        while (t < duration) {
            out.push_back(t);
            t += rng.exponential(rate);
        }
    }
    return out;
}
}  // namespace detail

/// Merges an independent homogeneous Poisson background into the stream.
inline TimestampStream add_background(const TimestampStream& stream, double rate,
                                      std::uint64_t seed) {
    if (rate < 0.0) throw std::invalid_argument("background rate must be >= 0");
    Rng rng(seed, rng_stream::kBackground);
    const std::vector<double> bg = detail::poisson_times(rng, rate, stream.duration());
    std::vector<double> out;
    out.reserve(stream.size() + bg.size());
    std::merge(stream.times().begin(), stream.times().end(), bg.begin(), bg.end(),
               std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return {stream.channel(), std::move(out), stream.duration()};
}

/// Detector response, applied in order: efficiency thinning, Gaussian timing
/// jitter (events jittered outside [0, duration] are dropped), dark-count
/// merge, re-sort, then dead-time rejection on the sorted record.
inline TimestampStream detect(const TimestampStream& stream, const DetectorParams& det,
                              std::uint64_t seed) {
    det.validate();
    Rng rng(seed, rng_stream::kDetect);

    std::vector<double> kept;
    kept.reserve(stream.size());
    for (double t : stream.times()) {
        if (det.efficiency < 1.0 && !rng.bernoulli(det.efficiency)) continue;
        double tt = t;
        if (det.jitter_sigma > 0.0) tt += rng.normal(0.0, det.jitter_sigma);
        if (tt >= 0.0 && tt <= stream.duration()) kept.push_back(tt);
    }
    Rng dark_rng(seed, rng_stream::indexed(rng_stream::kDetect, 1));
    const std::vector<double> dark =
        detail::poisson_times(dark_rng, det.dark_count_rate, stream.duration());
    kept.insert(kept.end(), dark.begin(), dark.end());
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());

    std::vector<double> out;
    out.reserve(kept.size());
    double last_accept = -std::numeric_limits<double>::infinity();
    for (double t : kept) {
        if (t - last_accept > det.dead_time) {
            out.push_back(t);
            last_accept = t;
        }
    }
    return {stream.channel(), std::move(out), stream.duration()};
}

/// Counts per bin over [0, duration]; the final partial bin is included.
inline std::vector<std::uint64_t> intensity_trace(const TimestampStream& stream,
                                                  double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    const std::size_t n_bins = std::size_t(std::ceil(stream.duration() / bin_width));
    std::vector<std::uint64_t> counts(std::max<std::size_t>(n_bins, 1), 0);
    for (double t : stream.times()) {
        std::size_t idx = std::size_t(t / bin_width);
        if (idx >= counts.size()) idx = counts.size() - 1;  // t == duration edge
        ++counts[idx];
    }
    return counts;
}

/// Bernoulli thinning with survival probability 10^(-total_dB/10).
inline TimestampStream apply_loss(const TimestampStream& stream, const LossChain& chain,
                                  std::uint64_t seed) {
    const double survival = db_to_linear(chain_total_db(chain));
    Rng rng(seed, rng_stream::kLoss);
    std::vector<double> out;
    out.reserve(std::size_t(double(stream.size()) * survival) + 16);
    for (double t : stream.times()) {
        if (survival >= 1.0 || rng.bernoulli(survival)) out.push_back(t);
    }
    return {stream.channel(), std::move(out), stream.duration()};
}

}  // namespace wgqd
