#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "wgqd/constants.hpp"

namespace wgqd {

/// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3", SC'11). Chosen because the algorithm is
/// fully specified by its constants, so any implementation of this toolkit
/// reproduces identical streams from identical (seed, stream) pairs.
///
/// Layout used here:
///   key     = (lo32(seed), hi32(seed))
///   counter = (lo32(block), hi32(block), lo32(stream), hi32(stream))
/// Each block yields four 32-bit words, consumed in order w0..w3.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        }
        return ctr;
    }
};

/// Seeded random stream. Distinct `stream` values under the same seed are
/// statistically independent; modules draw from fixed stream ids so that a
/// single master seed reproduces an entire pipeline.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = Philox4x32::block({std::uint32_t(block_), std::uint32_t(block_ >> 32),
                                      std::uint32_t(stream_), std::uint32_t(stream_ >> 32)},
                                     key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Exponential waiting time; rate 0 yields +infinity (the event never fires).
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform_pos()) / rate;
    }

    /// Standard normal via Box-Muller (consumes exactly two uniforms).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    /// Poisson count by accumulating unit-rate exponential arrivals over
    /// [0, lambda]. Robust for any lambda; cost grows linearly with lambda.
    std::uint64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        std::uint64_t k = 0;
        double acc = exponential(1.0);
        while (acc <= lambda) {
            ++k;
            acc += exponential(1.0);
        }
        return k;
    }

    std::uint64_t stream() const { return stream_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
};

/// Fixed stream ids, one per stochastic pipeline stage. Trial/channel indices
/// go in the low 32 bits so independent substreams never collide.
namespace rng_stream {
inline constexpr std::uint64_t kEmission = 0x01ull << 32;
inline constexpr std::uint64_t kHbtSplit = 0x02ull << 32;
inline constexpr std::uint64_t kBackground = 0x03ull << 32;
inline constexpr std::uint64_t kDetect = 0x04ull << 32;
inline constexpr std::uint64_t kLoss = 0x05ull << 32;
inline constexpr std::uint64_t kPlacement = 0x06ull << 32;

inline constexpr std::uint64_t indexed(std::uint64_t base, std::uint32_t index) {
    return base | index;
}
}  // namespace rng_stream

}  // namespace wgqd
