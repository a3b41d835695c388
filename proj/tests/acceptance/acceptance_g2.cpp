// Criterion 6: end-to-end photon statistics pipeline at >= 1e6 emitted
// photons, with and without Poisson background at rho = 0.77.
// Criterion 7: two-pointer correlator equals the all-pairs oracle bit-exactly
// on 100 random small streams.

#include <algorithm>
#include <chrono>

#include "acceptance.hpp"
#include "wgqd/correlation.hpp"

using namespace wgqd;

namespace {

G2Fit pipeline_fit(const TimestampStream& stream, std::uint64_t seed) {
    const auto [ch1, ch2] = hbt_split(stream, seed);
    return fit_g2(normalize(correlate(ch1, ch2, 150e-9, 2e-9)));
}

}  // namespace

int main() {
    acceptance::Report report;
    const auto t0 = std::chrono::steady_clock::now();

    // --- criterion 6 -------------------------------------------------------
    const double k_dec = 1.0 / 23.9e-9;
    const double k_exc = k_dec / 50.0;
    EmitterParams params;
    params.pump_rate = k_exc;
    params.decay_rate = k_dec;
    const double duration = 1.25;
    const TimestampStream emitted = simulate_emission(params, duration, 20240705);
    report.check(6, "emitted photon count >= 1e6", emitted.size() >= 1000000,
                 std::to_string(emitted.size()) + " photons");

    const G2Fit clean = pipeline_fit(emitted, 20240705);
    const double tau_expected = 1.0 / (k_exc + k_dec);
    report.check_within(6, "fitted tau vs 1/(k_exc+k_dec)", clean.tau_l, tau_expected,
                        0.10 * tau_expected);
    report.check_less(6, "fitted g2(0), no background", clean.g2_zero_raw, 0.1);

    const double rho = 0.77;
    const double signal_rate = emitted.mean_rate();
    const double background_rate = signal_rate * (1.0 - rho) / rho;
    const TimestampStream noisy = add_background(emitted, background_rate, 20240706);
    const G2Fit raw = pipeline_fit(noisy, 20240707);
    const double b_true = clean.b;
    report.check_within(6, "raw fitted g2(0) vs 1 - rho^2*b_true", raw.g2_zero_raw,
                        1.0 - rho * rho * b_true, 0.06);

    const double rho_measured = estimate_rho(signal_rate, background_rate);
    const G2Fit corrected = background_correct(raw, rho_measured);
    report.check_within(6, "corrected g2(0) vs no-background value", corrected.g2_zero_corrected,
                        clean.g2_zero_raw, 0.06);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.check_less(6, "pipeline runtime (s)", elapsed, 300.0);

    // --- criterion 7 -------------------------------------------------------
    Rng rng(777);
    int equal = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        auto make_stream = [&]() {
            const int n = int(rng.uniform(0.0, 100.0));
            std::vector<double> t;
            for (int i = 0; i < n; ++i) t.push_back(rng.uniform(0.0, 1.0));
            std::sort(t.begin(), t.end());
            t.erase(std::unique(t.begin(), t.end()), t.end());
            return TimestampStream("r", std::move(t), 1.0);
        };
        const TimestampStream a = make_stream();
        const TimestampStream b = make_stream();
        const double bin = rng.uniform(1e-3, 1e-2);
        const double window = bin * rng.uniform(3.0, 20.0);
        if (correlate(a, b, window, bin).counts ==
            correlate_brute_force(a, b, window, bin).counts) {
            ++equal;
        }
    }
    report.check(7, "two-pointer correlator equals all-pairs oracle bit-exactly",
                 equal == trials, std::to_string(equal) + "/" + std::to_string(trials));

    return report.exit_code();
}
