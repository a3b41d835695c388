// Criterion 2: y-dipole coupling efficiency varies by <= 0.05 absolute over
// hole radii {0, 25, 50, 75} nm at desk scale.

#include <algorithm>

#include "acceptance.hpp"
#include "fdtd_common.hpp"

using namespace wgqd;

int main() {
    acceptance::Report report;

    SweepSpec spec;
    spec.parameter = SweptParameter::HoleRadius;
    spec.values = {0.0, 25e-9, 50e-9, 75e-9};
    spec.orientations = {{0.0, 1.0, 0.0}};
    spec.run = acceptance::desk_run_config();
    spec.cache_dir = acceptance::cache_dir();
    const SweepResult result = sweep_radius(spec);

    double lo = 1.0, hi = 0.0;
    bool all_ok = true;
    for (const SweepRow& row : result.rows) {
        std::printf("    r = %4.1f nm: eta_wg = %.4f (%s)\n", row.value * 1e9, row.eta_wg,
                    row.status.c_str());
        all_ok = all_ok && row.status == "ok";
        lo = std::min(lo, row.eta_wg);
        hi = std::max(hi, row.eta_wg);
    }
    report.check(2, "radius sweep rows ok", all_ok, "4 rows");
    report.check_less(2, "eta_wg spread over r in {0,25,50,75} nm", hi - lo, 0.05);
    return report.exit_code();
}
