#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wgqd {

/// One attenuation stage. Attenuations are stored as positive dB; a stage
/// quoted as "-3 dB loss" enters as attenuation_db = 3.
struct LossStage {
    std::string name;
    double attenuation_db = 0.0;
};

class LossChain {
public:
    LossChain() = default;
    explicit LossChain(std::vector<LossStage> stages) : stages_(std::move(stages)) {
        for (const auto& s : stages_) {
            if (!(s.attenuation_db >= 0.0) || !std::isfinite(s.attenuation_db)) {
                throw std::invalid_argument("loss stage '" + s.name +
                                            "' must have a finite attenuation >= 0 dB");
            }
        }
    }

    void add_stage(std::string name, double attenuation_db) {
        if (!(attenuation_db >= 0.0) || !std::isfinite(attenuation_db)) {
            throw std::invalid_argument("loss stage '" + name +
                                        "' must have a finite attenuation >= 0 dB");
        }
        stages_.push_back({std::move(name), attenuation_db});
    }

    const std::vector<LossStage>& stages() const { return stages_; }
    bool empty() const { return stages_.empty(); }

private:
    std::vector<LossStage> stages_;
};

inline double chain_total_db(const LossChain& chain) {
    double total = 0.0;
    for (const auto& s : chain.stages()) total += s.attenuation_db;
    return total;
}

/// Transmission fraction of an attenuation expressed in dB.
inline double db_to_linear(double db) { return std::pow(10.0, -db / 10.0); }

/// Attenuation in dB of a transmission fraction in (0, 1].
inline double linear_to_db(double fraction) {
    if (!(fraction > 0.0)) throw std::invalid_argument("transmission fraction must be > 0");
    if (fraction > 1.0) throw std::invalid_argument("transmission fraction must be <= 1");
    return -10.0 * std::log10(fraction);
}

struct RateEstimate {
    double rate = 0.0;   // photons/s at the head of the chain
    double sigma = 0.0;  // 1-sigma uncertainty, scaled with the rate
};

/// Back-propagates a detected count rate through the chain to the source.
inline RateEstimate infer_source_rate(double detected_rate, const LossChain& chain,
                                      double detected_sigma = 0.0) {
    if (detected_rate < 0.0) throw std::invalid_argument("detected rate must be >= 0");
    if (detected_sigma < 0.0) throw std::invalid_argument("rate uncertainty must be >= 0");
    const double gain = std::pow(10.0, chain_total_db(chain) / 10.0);
    return {detected_rate * gain, detected_sigma * gain};
}

}  // namespace wgqd
