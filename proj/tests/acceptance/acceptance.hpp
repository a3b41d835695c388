#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace acceptance {

/// One pass/fail line per checked criterion clause; process exit code
/// reflects the aggregate.
class Report {
public:
    void check(int criterion, const std::string& what, bool ok, const std::string& detail) {
        std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", criterion,
                    what.c_str(), detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures_;
    }

    void check_within(int criterion, const std::string& what, double value, double target,
                      double tolerance) {
        char detail[160];
        std::snprintf(detail, sizeof(detail), "%.4g vs %.4g +/- %.3g", value, target, tolerance);
        check(criterion, what, std::abs(value - target) <= tolerance, detail);
    }

    void check_less(int criterion, const std::string& what, double value, double bound) {
        char detail[160];
        std::snprintf(detail, sizeof(detail), "%.4g < %.4g", value, bound);
        check(criterion, what, value < bound, detail);
    }

    int exit_code() const { return failures_ == 0 ? 0 : 1; }
    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

}  // namespace acceptance
