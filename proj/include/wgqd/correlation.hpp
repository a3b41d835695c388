#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wgqd/emitter.hpp"

namespace wgqd {

/// Coincidence counts binned in tau = t2 - t1, symmetric about zero with
/// tau = 0 at the center of the middle bin (odd bin count). The effective
/// window extends to the outer edge of the outermost bins,
/// (half_bins + 1/2) * bin_width.
struct G2Histogram {
    std::vector<std::int64_t> counts;  // size 2*half_bins + 1
    int half_bins = 0;
    double bin_width = 0.0;  // s
    double rate1 = 0.0, rate2 = 0.0;  // 1/s
    double duration = 0.0;            // s

    double tau_center(int i) const { return (i - half_bins) * bin_width; }
    std::int64_t total_counts() const {
        std::int64_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

namespace detail {
/// Symmetric bin index: round-half-away-from-zero so that bin(-tau) is
/// exactly -bin(tau), including edge values.
inline long long g2_bin_index(double tau, double bin_width) {
    return std::llround(tau / bin_width);
}
}  // namespace detail

/// Two-pointer coincidence sweep over sorted streams; O(n1 + n2 + pairs).
inline G2Histogram correlate(const TimestampStream& s1, const TimestampStream& s2,
                             double window, double bin_width) {
    if (!(bin_width > 0.0) || !(window > bin_width))
        throw std::invalid_argument("need window > bin_width > 0");
    G2Histogram hist;
    hist.half_bins = int(std::llround(window / bin_width));
    hist.bin_width = bin_width;
    hist.counts.assign(2 * hist.half_bins + 1, 0);
    hist.duration = std::max(s1.duration(), s2.duration());
    hist.rate1 = double(s1.size()) / hist.duration;
    hist.rate2 = double(s2.size()) / hist.duration;

    const double reach = (hist.half_bins + 0.5) * bin_width;
    const auto& a = s1.times();
    const auto& b = s2.times();
    std::size_t lo = 0, hi = 0;
    for (double t1 : a) {
        while (lo < b.size() && b[lo] < t1 - reach) ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.size() && b[hi] <= t1 + reach) ++hi;
        for (std::size_t j = lo; j < hi; ++j) {
            const long long idx = detail::g2_bin_index(b[j] - t1, bin_width);
            if (idx >= -hist.half_bins && idx <= hist.half_bins)
                ++hist.counts[std::size_t(idx + hist.half_bins)];
        }
    }
    return hist;
}

/// All-pairs reference correlator; same binning, for small inputs.
inline G2Histogram correlate_brute_force(const TimestampStream& s1, const TimestampStream& s2,
                                         double window, double bin_width) {
    G2Histogram hist;
    hist.half_bins = int(std::llround(window / bin_width));
    hist.bin_width = bin_width;
    hist.counts.assign(2 * hist.half_bins + 1, 0);
    hist.duration = std::max(s1.duration(), s2.duration());
    hist.rate1 = double(s1.size()) / hist.duration;
    hist.rate2 = double(s2.size()) / hist.duration;
    for (double t1 : s1.times()) {
        for (double t2 : s2.times()) {
            const long long idx = detail::g2_bin_index(t2 - t1, bin_width);
            if (idx >= -hist.half_bins && idx <= hist.half_bins)
                ++hist.counts[std::size_t(idx + hist.half_bins)];
        }
    }
    return hist;
}

struct G2Point {
    double tau = 0.0;
    double g2 = 0.0;
    double sigma = 0.0;        // Poisson standard error, sqrt(counts)/norm
    double norm = 0.0;         // r1*r2*bin_width*(T - |tau|)
    std::int64_t counts = 0;
};

struct G2Curve {
    std::vector<G2Point> points;

    std::size_t size() const { return points.size(); }
    double tau_span() const {
        return points.empty() ? 0.0 : points.back().tau - points.front().tau;
    }
};

/// Normalizes coincidences by the uncorrelated-pair expectation
/// r1*r2*bin_width*T_eff, with T_eff = T - |tau| accounting for window edge
/// truncation. A zero normalization (empty input streams) yields g2 = 0 with
/// sigma = 0 rather than an error, so all-zero histograms pass through.
inline G2Curve normalize(const G2Histogram& hist) {
    G2Curve curve;
    curve.points.reserve(hist.counts.size());
    for (int i = 0; i < int(hist.counts.size()); ++i) {
        G2Point p;
        p.tau = hist.tau_center(i);
        p.counts = hist.counts[std::size_t(i)];
        const double t_eff = hist.duration - std::abs(p.tau);
        p.norm = hist.rate1 * hist.rate2 * hist.bin_width * std::max(t_eff, 0.0);
        if (p.norm > 0.0) {
            p.g2 = double(p.counts) / p.norm;
            p.sigma = std::sqrt(double(p.counts)) / p.norm;
        }
        curve.points.push_back(p);
    }
    return curve;
}

/// Two-level-emitter autocorrelation model, g2(tau) = 1 - b*exp(-|tau|/tau_l).
inline double g2_two_level(double tau, double b, double tau_l) {
    return 1.0 - b * std::exp(-std::abs(tau) / tau_l);
}

/// Forward model of background dilution: a signal of purity rho mixed with
/// uncorrelated background has its dip scaled by rho^2.
inline double g2_background_diluted(double tau, double b, double tau_l, double rho) {
    return 1.0 + (g2_two_level(tau, b, tau_l) - 1.0) * rho * rho;
}

/// Composite model with the correction factor applied in the inverse
/// direction, i.e. 1 + (g2_func - 1)/rho^2. Note the asymmetry with
/// g2_background_diluted: dividing by rho^2 deepens the dip, so this form
/// maps a measured (diluted) curve back to the emitter-only statistic, not
/// the other way around. Both directions are provided; pick by use case.
inline double g2_composite_inverse(double tau, double b, double tau_l, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
    return 1.0 + (g2_two_level(tau, b, tau_l) - 1.0) / (rho * rho);
}

struct G2Fit {
    double b = 0.0;
    double tau_l = 0.0;
    double b_sigma = 0.0;
    double tau_l_sigma = 0.0;
    double rho = 1.0;
    double g2_zero_raw = 1.0;        // fitted model at tau = 0, 1 - b
    double g2_zero_corrected = 1.0;  // after background correction with rho
    double residual_norm = 0.0;      // sqrt(weighted SSE)
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

namespace detail {

struct WeightedCurve {
    std::vector<double> tau, g2, w;     // w = 1/sigma_fit^2
    std::vector<double> norm;           // per-bin normalization constant
};

/// Initial fit weights use inverse Poisson variance from the observed
/// counts; zero-count bins fall back to a variance surrogate of one count so
/// they carry finite weight.
inline WeightedCurve fit_weights(const G2Curve& curve) {
    WeightedCurve wc;
    for (const auto& p : curve.points) {
        if (!(p.norm > 0.0)) continue;
        const double counts_var = p.counts > 0 ? double(p.counts) : 1.0;
        const double sigma = std::sqrt(counts_var) / p.norm;
        wc.tau.push_back(p.tau);
        wc.g2.push_back(p.g2);
        wc.w.push_back(1.0 / (sigma * sigma));
        wc.norm.push_back(p.norm);
    }
    return wc;
}

/// Refreshed weights use the model-expected counts instead of the observed
/// ones. Observed-count weights overweight downward-fluctuating bins and
/// bias the dip deep at low counts per bin.
inline void reweight_from_model(WeightedCurve& wc, double b, double tau_l) {
    for (std::size_t i = 0; i < wc.tau.size(); ++i) {
        const double expected = std::max(g2_two_level(wc.tau[i], b, tau_l) * wc.norm[i], 1.0);
        wc.w[i] = wc.norm[i] * wc.norm[i] / expected;
    }
}

inline double g2_sse(const WeightedCurve& wc, double b, double tau_l) {
    double sse = 0.0;
    for (std::size_t i = 0; i < wc.tau.size(); ++i) {
        const double r = wc.g2[i] - g2_two_level(wc.tau[i], b, tau_l);
        sse += wc.w[i] * r * r;
    }
    return sse;
}

}  // namespace detail

/// Weighted least squares of 1 - b*exp(-|tau|/tau_l): Nelder-Mead simplex to
/// locate the basin, then Gauss-Newton to polish. Parameter uncertainties
/// come from the local quadratic model, cov = (J^T W J)^-1.
inline G2Fit fit_g2(const G2Curve& curve, int max_iterations = 10000) {
    G2Fit fit;
    detail::WeightedCurve wc = detail::fit_weights(curve);
    if (wc.tau.size() < 10) {
        throw std::invalid_argument("fit needs >= 10 normalizable bins");
    }

    double tau_max = 0.0, g2_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < wc.tau.size(); ++i) {
        tau_max = std::max(tau_max, std::abs(wc.tau[i]));
        g2_min = std::min(g2_min, wc.g2[i]);
    }
    double b0 = std::clamp(1.0 - g2_min, 0.0, 1.1);
    double tau0 = tau_max / 5.0;
    if (!(tau0 > 0.0)) throw std::invalid_argument("curve has no tau extent");

    // Nelder-Mead on (b, log tau_l).
    struct Vertex {
        std::array<double, 2> p;
        double f;
    };
    auto eval = [&](const std::array<double, 2>& p) {
        return detail::g2_sse(wc, p[0], std::exp(p[1]));
    };
    std::array<Vertex, 3> simplex{Vertex{{b0, std::log(tau0)}, 0.0},
                                  Vertex{{std::min(b0 + 0.2, 1.1), std::log(tau0)}, 0.0},
                                  Vertex{{b0, std::log(tau0) + 0.7}, 0.0}};
    for (auto& v : simplex) v.f = eval(v.p);
    int iters = 0;
    const int nm_budget = max_iterations / 2;
    while (iters < nm_budget) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (std::abs(simplex[2].f - simplex[0].f) <=
            1e-14 * (std::abs(simplex[0].f) + 1e-300))
            break;
        const std::array<double, 2> centroid{(simplex[0].p[0] + simplex[1].p[0]) / 2,
                                             (simplex[0].p[1] + simplex[1].p[1]) / 2};
        auto blend = [&](double coef) {
            return std::array<double, 2>{centroid[0] + coef * (simplex[2].p[0] - centroid[0]),
                                         centroid[1] + coef * (simplex[2].p[1] - centroid[1])};
        };
        const auto refl = blend(-1.0);
        const double f_refl = eval(refl);
        ++iters;
        if (f_refl < simplex[0].f) {
            const auto expa = blend(-2.0);
            const double f_expa = eval(expa);
            simplex[2] = f_expa < f_refl ? Vertex{expa, f_expa} : Vertex{refl, f_refl};
        } else if (f_refl < simplex[1].f) {
            simplex[2] = {refl, f_refl};
        } else {
            const auto contr = blend(0.5);
            const double f_contr = eval(contr);
            if (f_contr < simplex[2].f) {
                simplex[2] = {contr, f_contr};
            } else {
                for (int k = 1; k < 3; ++k) {
                    simplex[k].p[0] = (simplex[k].p[0] + simplex[0].p[0]) / 2;
                    simplex[k].p[1] = (simplex[k].p[1] + simplex[0].p[1]) / 2;
                    simplex[k].f = eval(simplex[k].p);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    double b = simplex[0].p[0];
    double tau_l = std::exp(simplex[0].p[1]);

    // Gauss-Newton refinement with step halving; rerun after refreshing the
    // weights from the fitted model.
    bool gn_converged = false;
    auto gauss_newton = [&](double& b_io, double& tau_io) {
        double sse = detail::g2_sse(wc, b_io, tau_io);
        gn_converged = false;
        while (iters < max_iterations) {
            double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
            for (std::size_t i = 0; i < wc.tau.size(); ++i) {
                const double e = std::exp(-std::abs(wc.tau[i]) / tau_io);
                const double r = wc.g2[i] - (1.0 - b_io * e);
                const double db = -e;
                const double dtau = -b_io * e * std::abs(wc.tau[i]) / (tau_io * tau_io);
                jtj00 += wc.w[i] * db * db;
                jtj01 += wc.w[i] * db * dtau;
                jtj11 += wc.w[i] * dtau * dtau;
                jtr0 += wc.w[i] * db * r;
                jtr1 += wc.w[i] * dtau * r;
            }
            const double det = jtj00 * jtj11 - jtj01 * jtj01;
            if (!(std::abs(det) > 1e-300)) break;
            const double step_b = -(jtj11 * jtr0 - jtj01 * jtr1) / det;
            const double step_tau = -(jtj00 * jtr1 - jtj01 * jtr0) / det;
            double scale = 1.0;
            bool improved = false;
            for (int halving = 0; halving < 20 && iters < max_iterations; ++halving) {
                ++iters;
                const double nb = b_io + scale * step_b;
                const double ntau = tau_io + scale * step_tau;
                if (ntau > 0.0) {
                    const double nsse = detail::g2_sse(wc, nb, ntau);
                    if (nsse <= sse) {
                        improved = std::abs(nsse - sse) > 1e-15 * (sse + 1e-300) ||
                                   std::abs(scale * step_b) > 1e-12 ||
                                   std::abs(scale * step_tau) > 1e-12 * tau_io;
                        const bool tiny = std::abs(scale * step_b) < 1e-10 &&
                                          std::abs(scale * step_tau) < 1e-10 * std::abs(tau_io);
                        b_io = nb;
                        tau_io = ntau;
                        sse = nsse;
                        if (tiny) {
                            gn_converged = true;
                            improved = false;
                        }
                        break;
                    }
                }
                scale /= 2;
            }
            if (gn_converged || !improved) {
                gn_converged = true;
                break;
            }
        }
        return sse;
    };

    double sse = gauss_newton(b, tau_l);
    for (int pass = 0; pass < 2; ++pass) {
        detail::reweight_from_model(wc, b, tau_l);
        sse = gauss_newton(b, tau_l);
    }

    fit.b = b;
    fit.tau_l = tau_l;
    fit.iterations = iters;
    fit.converged = gn_converged;
    fit.residual_norm = std::sqrt(sse);
    fit.g2_zero_raw = 1.0 - b;
    fit.g2_zero_corrected = fit.g2_zero_raw;
    if (!gn_converged) fit.warnings.push_back("fit did not converge; best point reported");

    // Covariance from the final Jacobian.
    {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0;
        for (std::size_t i = 0; i < wc.tau.size(); ++i) {
            const double e = std::exp(-std::abs(wc.tau[i]) / tau_l);
            const double db = -e;
            const double dtau = -b * e * std::abs(wc.tau[i]) / (tau_l * tau_l);
            jtj00 += wc.w[i] * db * db;
            jtj01 += wc.w[i] * db * dtau;
            jtj11 += wc.w[i] * dtau * dtau;
        }
        const double det = jtj00 * jtj11 - jtj01 * jtj01;
        if (det > 1e-300) {
            fit.b_sigma = std::sqrt(std::max(jtj11 / det, 0.0));
            fit.tau_l_sigma = std::sqrt(std::max(jtj00 / det, 0.0));
        } else {
            fit.b_sigma = fit.tau_l_sigma = std::numeric_limits<double>::infinity();
            fit.warnings.push_back("degenerate curvature; parameter uncertainties unbounded");
        }
    }
    if (fit.b < 1e-6) {
        fit.tau_l_sigma = std::numeric_limits<double>::infinity();
        fit.warnings.push_back("flat curve (b ~ 0); tau_l unconstrained");
    }
    if (tau_max < 3.0 * fit.tau_l) {
        fit.warnings.push_back("curve spans < 3*tau_l; fit may be poorly constrained");
    }
    return fit;
}

/// Removes uncorrelated-background dilution given purity rho = S/(S+B):
/// g2_corr = 1 + (g2_raw - 1)/rho^2, the inverse of g2_background_diluted.
inline G2Curve background_correct(const G2Curve& curve, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
    G2Curve out = curve;
    for (auto& p : out.points) {
        p.g2 = 1.0 + (p.g2 - 1.0) / (rho * rho);
        p.sigma = p.sigma / (rho * rho);
    }
    return out;
}

inline G2Fit background_correct(const G2Fit& fit, double rho) {
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
    G2Fit out = fit;
    out.rho = rho;
    out.g2_zero_corrected = 1.0 + (fit.g2_zero_raw - 1.0) / (rho * rho);
    return out;
}

/// Signal purity from rates measured on signal and reference devices.
inline double estimate_rho(double signal_rate, double background_rate) {
    if (signal_rate < 0.0 || background_rate < 0.0)
        throw std::invalid_argument("rates must be >= 0");
    const double total = signal_rate + background_rate;
    if (!(total > 0.0)) throw std::invalid_argument("signal + background must be > 0");
    return signal_rate / total;
}

}  // namespace wgqd
