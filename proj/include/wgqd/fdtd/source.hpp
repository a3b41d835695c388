#pragma once

#include <cmath>
#include <stdexcept>

#include "wgqd/constants.hpp"
#include "wgqd/geometry.hpp"

namespace wgqd::fdtd {

/// Gaussian-modulated sinusoid. The envelope width follows from the
/// fractional spectral bandwidth (FWHM of the field spectrum relative to the
/// carrier); the delay keeps the turn-on transient below -60 dB and pushes
/// the DC content far below that.
struct GaussianPulse {
    double wavelength = 705e-9;
    double fractional_bandwidth = 0.2;
    double delay_widths = 6.0;

    double frequency() const { return speed_of_light / wavelength; }
    double omega() const { return 2.0 * pi * frequency(); }
    double envelope_width() const {
        const double sigma_f = fractional_bandwidth * frequency() / 2.35482;
        return 1.0 / (2.0 * pi * sigma_f);
    }
    double delay() const { return delay_widths * envelope_width(); }
    double end_time() const { return 2.0 * delay(); }

    double value(double t) const {
        const double u = t - delay();
        const double w = envelope_width();
        return std::sin(omega() * u) * std::exp(-u * u / (2.0 * w * w));
    }
};

/// Point current source. `amplitude` is the current moment I*dl in A*m; the
/// injected current density spreads over the nearest Yee nodes of each
/// driven component with trilinear weights, so sub-cell positioning is
/// smooth and a centered dipole stays exactly centered.
struct DipoleSource {
    Vec3 position;                 // device coordinates, m
    Vec3 orientation{0.0, 1.0, 0.0};
    GaussianPulse pulse;
    double amplitude = 1.0;        // A*m

    void validate(double emission_wavelength) const {
        const double n2 = orientation.x * orientation.x + orientation.y * orientation.y +
                          orientation.z * orientation.z;
        if (std::abs(n2 - 1.0) > 1e-9)
            throw std::invalid_argument("dipole orientation must be a unit vector");
        if (std::abs(pulse.wavelength - emission_wavelength) > 1e-15)
            throw std::invalid_argument("source wavelength must match the emission wavelength");
    }
};

}  // namespace wgqd::fdtd
