// Criterion 3: y-dipole coupling at depth 0 within 0.28 +/- 0.08, and the
// maximum over the swept depths falls in the 80-100 nm range.

#include "acceptance.hpp"
#include "fdtd_common.hpp"

using namespace wgqd;

int main() {
    acceptance::Report report;

    SweepSpec spec;
    spec.parameter = SweptParameter::HoleDepth;
    spec.values = {0.0, 20e-9, 40e-9, 60e-9, 80e-9, 100e-9};
    spec.orientations = {{0.0, 1.0, 0.0}};
    spec.run = acceptance::desk_run_config();
    spec.cache_dir = acceptance::cache_dir();
    const SweepResult result = sweep_depth(spec);

    bool all_ok = true;
    double eta_at_zero = 0.0;
    double best_eta = -1.0, best_depth = -1.0;
    for (const SweepRow& row : result.rows) {
        std::printf("    depth = %5.1f nm: eta_wg = %.4f (%s)\n", row.value * 1e9, row.eta_wg,
                    row.status.c_str());
        all_ok = all_ok && row.status == "ok";
        if (row.value == 0.0) eta_at_zero = row.eta_wg;
        if (row.eta_wg > best_eta) {
            best_eta = row.eta_wg;
            best_depth = row.value;
        }
    }
    report.check(3, "depth sweep rows ok", all_ok, "6 rows");
    report.check_within(3, "eta_wg at depth 0", eta_at_zero, 0.28, 0.08);
    char detail[96];
    std::snprintf(detail, sizeof(detail), "argmax at %.0f nm (eta %.4f)", best_depth * 1e9,
                  best_eta);
    report.check(3, "maximum eta_wg within depth 80-100 nm",
                 best_depth >= 80e-9 - 1e-12 && best_depth <= 100e-9 + 1e-12, detail);
    return report.exit_code();
}
