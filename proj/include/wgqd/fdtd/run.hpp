#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wgqd/fdtd/monitor.hpp"
#include "wgqd/fdtd/solver.hpp"
#include "wgqd/geometry.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wgqd::fdtd {

/// Physical placement of the flux monitors around the crossing.
///
/// The below-guide margin is kept shorter than the lateral/above margins:
/// the plane must catch the guided mode's substrate tail but every extra
/// cell below the guide admits substrate-radiated light that was never
/// guided, which otherwise dominates the reading for x- and z-oriented
/// dipoles.
struct MonitorLayout {
    double waveguide_distance = 2.2e-6;      // |x| of the left/right planes
    double waveguide_margin = 300e-9;        // lateral and above-guide extent margin
    double waveguide_margin_below = 150e-9;  // below-guide extent margin
    double top_standoff = 450e-9;            // above the guide top
    double bottom_depth = 500e-9;            // below the substrate top
    double top_bottom_half_width = 1.55e-6;  // lateral half-extent of the z-planes
    int source_box_offset_cells = 3;
    double numerical_aperture = 0.9;
};

struct SourceSettings {
    double amplitude = 1.0;  // current moment, A*m
    double fractional_bandwidth = 0.2;
};

struct RunConfig {
    double cell_size = 20e-9;
    double courant = 0.95;
    PmlParams pml{};
    SourceSettings source{};
    MonitorLayout monitors{};
    Simulation3D::Termination termination{40000, 1e-5, 10};
    std::size_t max_cells = 200'000'000;
    int threads = 0;  // > 0 pins the OpenMP team size
    bool export_monitor_fields = false;
};

/// Per-pixel time-averaged normal Poynting flux density of one monitor,
/// for plot-ready CSV export.
struct MonitorFieldMap {
    std::string name;
    int axis = 0;
    std::vector<double> a_coords, b_coords;  // pixel centers, m
    double plane_coord = 0.0;
    std::vector<double> values;  // W/m^2 per pixel, row-major over (a, b)
};

struct CouplingResult {
    double p_left = 0.0, p_right = 0.0, p_top = 0.0, p_bottom = 0.0;
    double p_total = 0.0;
    double eta_wg = 0.0;
    double eta_na = 0.0;
    double monitor_sum_fraction = 0.0;
    int steps_run = 0;
    bool converged = false;
    double peak_energy = 0.0, final_energy = 0.0;
    double max_post_source_rise = 0.0;
    std::vector<std::string> warnings;
    std::vector<MonitorFieldMap> field_maps;
};

namespace detail {

inline MonitorFieldMap extract_field_map(const Simulation3D& sim, const PlaneMonitor& m,
                                         const PermittivityGrid& grid) {
    MonitorFieldMap map;
    map.name = m.name;
    map.axis = m.axis;
    const Vec3 o = grid.origin;
    const double h = grid.cell_size;
    const double axis_origin[3] = {o.x, o.y, o.z};
    map.plane_coord = axis_origin[m.axis] + m.index * h;
    const int t1 = (m.axis + 1) % 3, t2 = (m.axis + 2) % 3;
    for (int a = m.a_lo; a < m.a_hi; ++a)
        map.a_coords.push_back(axis_origin[t1] + (a + 0.5) * h);
    for (int b = m.b_lo; b < m.b_hi; ++b)
        map.b_coords.push_back(axis_origin[t2] + (b + 0.5) * h);
    map.values.reserve(m.e_t1.size());
    for (std::size_t i = 0; i < m.e_t1.size(); ++i) {
        map.values.push_back(
            0.5 * (m.e_t1[i] * std::conj(m.h_t2[i]) - m.e_t2[i] * std::conj(m.h_t1[i])).real());
    }
    (void)sim;
    return map;
}

}  // namespace detail

/// Full device run: rasterize, place the dipole and monitors, time-step to
/// energy decay, and report coupling efficiencies at the emission
/// wavelength.
inline CouplingResult run_simulation(const DeviceGeometry& geometry, const RunConfig& config) {
    const GeometryReport report = validate_geometry(geometry);
    if (!report.ok()) throw std::invalid_argument(report.to_string());
#ifdef _OPENMP
    if (config.threads > 0) omp_set_num_threads(config.threads);
#endif

    const PermittivityGrid grid =
        build_permittivity_grid(geometry, config.cell_size, config.max_cells);

    Simulation3D::Params params;
    params.courant = config.courant;
    params.pml = config.pml;
    params.analysis_wavelength = geometry.emission_wavelength;
    Simulation3D sim(grid, params);

    DipoleSource source;
    source.position = geometry.emitter_absolute();
    source.orientation = geometry.dipole_orientation;
    source.pulse.wavelength = geometry.emission_wavelength;
    source.pulse.fractional_bandwidth = config.source.fractional_bandwidth;
    source.amplitude = config.source.amplitude;
    source.validate(geometry.emission_wavelength);
    sim.add_dipole(source);

    CouplingResult result;
    const MonitorLayout& lay = config.monitors;
    const double h = grid.cell_size;
    auto pixel_floor = [&](double coord, double origin) {
        return std::clamp(int(std::floor((coord - origin) / h)), 0, 1 << 28);
    };
    auto pixel_ceil = [&](double coord, double origin, int n) {
        return std::clamp(int(std::ceil((coord - origin) / h)), 0, n);
    };

    // Left/right planes span the guide cross-section plus margins.
    const double half_w = geometry.waveguide_width / 2;
    const int j_lo = pixel_floor(-half_w - lay.waveguide_margin, grid.origin.y);
    const int j_hi = pixel_ceil(half_w + lay.waveguide_margin, grid.origin.y, grid.ny);
    const int k_lo = pixel_floor(-lay.waveguide_margin_below, grid.origin.z);
    const int k_hi = pixel_ceil(geometry.waveguide_height + lay.waveguide_margin, grid.origin.z,
                                grid.nz);
    const int i_left = sim.node_i(-lay.waveguide_distance);
    const int i_right = sim.node_i(lay.waveguide_distance);
    const int id_left = sim.add_plane_monitor("left", 0, i_left, j_lo, j_hi, k_lo, k_hi, -1.0);
    const int id_right = sim.add_plane_monitor("right", 0, i_right, j_lo, j_hi, k_lo, k_hi, +1.0);

    // Finite top/bottom planes centered on the crossing.
    const int inset = config.pml.thickness + 2;
    const int k_top = sim.node_k(geometry.waveguide_height + lay.top_standoff);
    const int k_bottom = sim.node_k(-lay.bottom_depth);
    const int tb_lo_x = std::max(pixel_floor(-lay.top_bottom_half_width, grid.origin.x), inset);
    const int tb_hi_x =
        std::min(pixel_ceil(lay.top_bottom_half_width, grid.origin.x, grid.nx), grid.nx - inset);
    const int tb_lo_y = std::max(pixel_floor(-lay.top_bottom_half_width, grid.origin.y), inset);
    const int tb_hi_y =
        std::min(pixel_ceil(lay.top_bottom_half_width, grid.origin.y, grid.ny), grid.ny - inset);
    const int id_top =
        sim.add_plane_monitor("top", 2, k_top, tb_lo_x, tb_hi_x, tb_lo_y, tb_hi_y, +1.0);
    const int id_bottom =
        sim.add_plane_monitor("bottom", 2, k_bottom, tb_lo_x, tb_hi_x, tb_lo_y, tb_hi_y, -1.0);

    const Vec3 e = geometry.emitter_absolute();
    const BoxMonitor box = sim.add_source_box(sim.node_i(e.x), sim.node_j(e.y), sim.node_k(e.z),
                                              lay.source_box_offset_cells);

    const double lambda = geometry.emission_wavelength;
    if ((sim.z_node(k_top) - geometry.waveguide_height) < lambda / 2) {
        result.warnings.push_back("top monitor closer than lambda/2 to the structure; "
                                  "NA filtering is near-field contaminated");
    }

    const Simulation3D::RunOutcome outcome = sim.run(config.termination);
    result.steps_run = outcome.steps;
    result.converged = outcome.converged;
    result.peak_energy = outcome.peak_energy;
    result.final_energy = outcome.final_energy;
    result.max_post_source_rise = outcome.max_post_source_rise;
    if (!outcome.converged) {
        result.warnings.push_back("energy did not decay below threshold within max_steps; "
                                  "fluxes may be unconverged");
    }

    result.p_left = sim.monitor(id_left).flux();
    result.p_right = sim.monitor(id_right).flux();
    result.p_top = sim.monitor(id_top).flux();
    result.p_bottom = sim.monitor(id_bottom).flux();
    result.p_total = total_emitted_power(sim.monitors(), box);

    if (result.p_total > 0.0) {
        result.eta_wg = (result.p_left + result.p_right) / result.p_total;
        result.monitor_sum_fraction =
            (result.p_left + result.p_right + result.p_top + result.p_bottom) / result.p_total;
        result.eta_na = na_filtered_flux(sim.monitor(id_top), lay.numerical_aperture, lambda, h) /
                        result.p_total;
        for (double p : {result.p_left, result.p_right, result.p_top, result.p_bottom}) {
            if (p > result.p_total * 1.01) {
                result.warnings.push_back("a single monitor exceeds the total emitted power "
                                          "beyond 1% tolerance");
                break;
            }
        }
        if (result.eta_wg < 0.0 || result.eta_wg > 1.01) {
            result.warnings.push_back("eta_wg outside [0, 1] beyond tolerance");
        }
    } else {
        result.warnings.push_back("total emitted power is zero; efficiencies undefined");
    }

    if (config.export_monitor_fields) {
        for (int id : {id_left, id_right, id_top, id_bottom}) {
            result.field_maps.push_back(detail::extract_field_map(sim, sim.monitor(id), grid));
        }
    }
    return result;
}

/// Confocal collection fraction: NA-filtered flux of the top monitor over
/// the total emitted power.
inline double na_collection(const PlaneMonitor& top_monitor, double numerical_aperture,
                            double wavelength, double cell_size, double p_total) {
    if (!(p_total > 0.0)) throw std::invalid_argument("total power must be > 0");
    return na_filtered_flux(top_monitor, numerical_aperture, wavelength, cell_size) / p_total;
}

}  // namespace wgqd::fdtd
