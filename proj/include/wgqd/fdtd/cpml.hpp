#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "wgqd/constants.hpp"

namespace wgqd::fdtd {

/// Convolutional PML settings. sigma grades polynomially from zero at the
/// interior interface to sigma_max at the outer wall, with sigma_max chosen
/// for the requested nominal normal-incidence reflection.
struct PmlParams {
    int thickness = 10;              // cells per side
    double grading_order = 3.0;
    double kappa_max = 1.0;
    double alpha_max = 0.0;          // CFS shift, S/m
    double target_reflection = 1e-8;
};

/// Per-axis CPML recursion coefficients, sampled at the integer (E-update)
/// and half-integer (H-update) positions along the axis.
struct AxisPml {
    int thickness = 0;  // 0 disables the boundary on this axis
    std::vector<double> b_e, c_e, inv_kappa_e;  // node positions 0..n
    std::vector<double> b_h, c_h, inv_kappa_h;  // positions i+1/2, i = 0..n-1
};

inline AxisPml build_axis_pml(int n_cells, double cell_size, double dt, const PmlParams& p) {
    if (p.thickness < 0) throw std::invalid_argument("pml thickness must be >= 0");
    if (p.thickness > 0 && 2 * p.thickness + 4 > n_cells) {
        throw std::invalid_argument("domain too small for the requested PML thickness");
    }
    AxisPml axis;
    axis.thickness = p.thickness;
    axis.b_e.assign(std::size_t(n_cells) + 1, 0.0);
    axis.c_e.assign(std::size_t(n_cells) + 1, 0.0);
    axis.inv_kappa_e.assign(std::size_t(n_cells) + 1, 1.0);
    axis.b_h.assign(std::size_t(n_cells), 0.0);
    axis.c_h.assign(std::size_t(n_cells), 0.0);
    axis.inv_kappa_h.assign(std::size_t(n_cells), 1.0);
    if (p.thickness == 0) return axis;

    const double width = p.thickness * cell_size;
    const double sigma_max = -(p.grading_order + 1.0) * std::log(p.target_reflection) /
                             (2.0 * vacuum_impedance * width);

    auto fill = [&](double depth_fraction, double& b, double& c, double& inv_kappa) {
        const double g = std::pow(depth_fraction, p.grading_order);
        const double sigma = sigma_max * g;
        const double kappa = 1.0 + (p.kappa_max - 1.0) * g;
        const double alpha = p.alpha_max * (1.0 - depth_fraction);
        b = std::exp(-(sigma / kappa + alpha) * dt / vacuum_permittivity);
        const double denom = kappa * (sigma + kappa * alpha);
        c = denom > 0.0 ? sigma * (b - 1.0) / denom : 0.0;
        inv_kappa = 1.0 / kappa;
    };

    const int t = p.thickness;
    for (int i = 0; i <= n_cells; ++i) {
        double depth = 0.0;
        if (i < t) depth = double(t - i) / t;
        else if (i > n_cells - t) depth = double(i - (n_cells - t)) / t;
        if (depth > 0.0) fill(depth, axis.b_e[std::size_t(i)], axis.c_e[std::size_t(i)],
                              axis.inv_kappa_e[std::size_t(i)]);
    }
    for (int i = 0; i < n_cells; ++i) {
        const double pos = i + 0.5;
        double depth = 0.0;
        if (pos < t) depth = (t - pos) / t;
        else if (pos > n_cells - t) depth = (pos - (n_cells - t)) / t;
        if (depth > 0.0) fill(depth, axis.b_h[std::size_t(i)], axis.c_h[std::size_t(i)],
                              axis.inv_kappa_h[std::size_t(i)]);
    }
    return axis;
}

}  // namespace wgqd::fdtd
