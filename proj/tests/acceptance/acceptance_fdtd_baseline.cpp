// Criteria 1, 4 and the device-side parts of 5: desk-scale baseline runs of
// the crossing (y/x/z dipole, 25 nm hole, 100 nm depth, 20 nm grid).

#include "acceptance.hpp"
#include "fdtd_common.hpp"

using namespace wgqd;

int main() {
    acceptance::Report report;

    DeviceGeometry baseline;  // y-dipole defaults
    const SweepRow y = acceptance::cached_device_run(baseline);
    report.check(1, "baseline y-dipole run ok", y.status == "ok", y.status);
    report.check_within(1, "y-dipole eta_wg", y.eta_wg, 0.47, 0.10);
    if (y.wall_seconds > 0.0) {
        report.check_less(1, "runtime per case (s)", y.wall_seconds, 600.0);
    }

    DeviceGeometry gx = baseline;
    gx.dipole_orientation = {1.0, 0.0, 0.0};
    const SweepRow x = acceptance::cached_device_run(gx);
    report.check(1, "baseline x-dipole run ok", x.status == "ok", x.status);
    report.check_less(1, "x-dipole eta_wg", x.eta_wg, 0.05);

    DeviceGeometry gz = baseline;
    gz.dipole_orientation = {0.0, 0.0, 1.0};
    const SweepRow z = acceptance::cached_device_run(gz);
    report.check(1, "baseline z-dipole run ok", z.status == "ok", z.status);
    report.check_less(1, "z-dipole eta_wg", z.eta_wg, 0.05);

    report.check_within(4, "four-monitor sum / P_total (y baseline)", y.monitor_sum_fraction,
                        0.84, 0.10);
    report.check_less(4, "four-monitor sum stays below P_total", y.monitor_sum_fraction, 1.01);

    const double lr_asym = std::abs(y.p_left - y.p_right) /
                           std::max(std::abs(y.p_right), 1e-300);
    report.check_less(5, "x-mirror symmetry |P_left - P_right|/P_right", lr_asym, 0.01);
    report.check_less(5, "energy non-increase after source off (max ratio)",
                      y.max_post_source_rise, 1.005);

    return report.exit_code();
}
