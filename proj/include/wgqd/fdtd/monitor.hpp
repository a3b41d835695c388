#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgqd/constants.hpp"

namespace wgqd::fdtd {

/// Axis-aligned DFT flux plane. The plane sits on integer grid nodes along
/// its normal; tangential E and H are averaged onto in-plane pixel centers
/// and accumulated at the analysis frequency every step. Flux is the
/// time-averaged Poynting flow through the plane, positive along +normal
/// times `sign`.
///
/// Pixel (a, b) spans the in-plane cell (a, b); axes (t1, t2) follow the
/// cyclic order of the normal: x -> (y, z), y -> (z, x), z -> (x, y).
struct PlaneMonitor {
    std::string name;
    int axis = 0;        // normal: 0 = x, 1 = y, 2 = z
    int index = 0;       // node index along the normal
    int a_lo = 0, a_hi = 0;  // pixel range along t1 (cells)
    int b_lo = 0, b_hi = 0;  // pixel range along t2 (cells)
    double sign = 1.0;
    double omega = 0.0;
    double pixel_area = 0.0;

    std::vector<std::complex<double>> e_t1, e_t2, h_t1, h_t2;

    int pixels_a() const { return a_hi - a_lo; }
    int pixels_b() const { return b_hi - b_lo; }
    std::size_t pixel_index(int a, int b) const {
        return std::size_t(a - a_lo) * std::size_t(pixels_b()) + std::size_t(b - b_lo);
    }

    void allocate() {
        const std::size_t n = std::size_t(pixels_a()) * std::size_t(pixels_b());
        if (pixels_a() <= 0 || pixels_b() <= 0)
            throw std::invalid_argument("monitor plane '" + name + "' has empty extent");
        e_t1.assign(n, {});
        e_t2.assign(n, {});
        h_t1.assign(n, {});
        h_t2.assign(n, {});
    }

    /// Time-averaged Poynting flux of the accumulated fields.
    double flux() const {
        double p = 0.0;
        for (std::size_t i = 0; i < e_t1.size(); ++i) {
            p += (e_t1[i] * std::conj(h_t2[i]) - e_t2[i] * std::conj(h_t1[i])).real();
        }
        return 0.5 * sign * p * pixel_area;
    }
};

/// Closed six-face box around the source; outward flux sums to the total
/// emitted power at the analysis frequency.
struct BoxMonitor {
    int face_ids[6] = {-1, -1, -1, -1, -1, -1};
};

/// Total emitted power from the box faces. A total more negative than
/// -|tolerance| * (sum of |face fluxes|) indicates misconfigured face
/// orientations and throws.
inline double total_emitted_power(const std::vector<PlaneMonitor>& monitors,
                                  const BoxMonitor& box, double tolerance = 0.01) {
    double total = 0.0, magnitude = 0.0;
    for (int id : box.face_ids) {
        const double f = monitors[std::size_t(id)].flux();
        total += f;
        magnitude += std::abs(f);
    }
    if (total < -tolerance * magnitude) {
        throw std::runtime_error("source box reports negative total power; "
                                 "monitor orientations are misconfigured");
    }
    return total;
}

/// Angular-spectrum NA filter for a z-normal plane monitor held above the
/// structure. The tangential DFT fields are Fourier-transformed over the
/// plane, plane-wave components with transverse wavenumber beyond na*k0 are
/// dropped, and the flux of the filtered field is returned (Parseval form;
/// no inverse transform needed). k0 is the free-space wavenumber of the
/// analysis wavelength.
inline double na_filtered_flux(const PlaneMonitor& monitor, double na, double wavelength,
                               double cell_size) {
    if (monitor.axis != 2)
        throw std::invalid_argument("NA filter expects a z-normal monitor plane");
    if (na < 0.0 || na > 1.0) throw std::invalid_argument("numerical aperture must lie in [0,1]");
    if (na == 0.0) return 0.0;

    const int na_pix = monitor.pixels_a();
    const int nb_pix = monitor.pixels_b();
    const std::size_t n = std::size_t(na_pix) * std::size_t(nb_pix);
    const double wx = na_pix * cell_size;
    const double wy = nb_pix * cell_size;
    const double k0 = 2.0 * pi / wavelength;
    const double k_cut = na * k0;
    const int m_max = int(std::floor(k_cut * wx / (2.0 * pi))) + 1;
    const int n_max = int(std::floor(k_cut * wy / (2.0 * pi))) + 1;

    double p = 0.0;
    for (int mx = -m_max; mx <= m_max; ++mx) {
        const double kx = 2.0 * pi * mx / wx;
        for (int my = -n_max; my <= n_max; ++my) {
            const double ky = 2.0 * pi * my / wy;
            if (kx * kx + ky * ky > k_cut * k_cut) continue;
            std::complex<double> ex{}, ey{}, hx{}, hy{};
            std::size_t idx = 0;
            for (int a = 0; a < na_pix; ++a) {
                const double xa = (a + 0.5) * cell_size;
                for (int b = 0; b < nb_pix; ++b, ++idx) {
                    const double yb = (b + 0.5) * cell_size;
                    const double phase = -(kx * xa + ky * yb);
                    const std::complex<double> w{std::cos(phase), std::sin(phase)};
                    ex += monitor.e_t1[idx] * w;
                    ey += monitor.e_t2[idx] * w;
                    hx += monitor.h_t1[idx] * w;
                    hy += monitor.h_t2[idx] * w;
                }
            }
            p += (ex * std::conj(hy) - ey * std::conj(hx)).real();
        }
    }
    return 0.5 * monitor.sign * p * monitor.pixel_area / double(n);
}

}  // namespace wgqd::fdtd
