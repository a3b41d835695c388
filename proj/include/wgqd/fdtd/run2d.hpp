#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wgqd/fdtd/run.hpp"
#include "wgqd/fdtd/solver2d.hpp"

namespace wgqd::fdtd {

struct Run2DConfig {
    double cell_size = 20e-9;
    double courant = 0.95;
    PmlParams pml{};
    SourceSettings source{};
    MonitorLayout monitors{};
    Simulation3D::Termination termination{40000, 1e-5, 10};
    int frame_interval = 0;  // steps between captured field frames; 0 disables
};

struct FieldFrame {
    int step = 0;
    double time = 0.0;
    std::vector<double> values;  // out-of-plane field at cell centers, (u, v) row-major
};

struct Result2D {
    // Monitor fluxes in slice coordinates: u is always x; v is y (XY slice)
    // or z (XZ slice).
    double p_u_minus = 0.0, p_u_plus = 0.0, p_v_minus = 0.0, p_v_plus = 0.0;
    double p_total = 0.0;
    double waveguide_fraction = 0.0;  // (p_u_minus + p_u_plus) / p_total
    int nu = 0, nv = 0;
    double cell_size = 0.0, origin_u = 0.0, origin_v = 0.0;
    int steps_run = 0;
    bool converged = false;
    Polarization2D polarization = Polarization2D::OutOfPlaneE;
    std::vector<FieldFrame> frames;
    std::vector<std::string> warnings;
};

/// 2-D cross-section run through the emitter. The slice picks its
/// polarization from the dipole orientation: out-of-plane dipoles drive the
/// scalar-E solve, in-plane dipoles the scalar-H solve.
inline Result2D run_simulation_2d(const DeviceGeometry& geometry, SlicePlane plane,
                                  const Run2DConfig& config) {
    const Vec3 e = geometry.emitter_absolute();
    const double slice_coord = plane == SlicePlane::XY ? e.z : e.y;
    const SliceGrid grid = rasterize_slice(geometry, plane, slice_coord, config.cell_size);

    // Map the dipole orientation into (u, v, w) slice coordinates.
    Vec3 uvw;
    if (plane == SlicePlane::XY) {
        uvw = {geometry.dipole_orientation.x, geometry.dipole_orientation.y,
               geometry.dipole_orientation.z};
    } else {
        uvw = {geometry.dipole_orientation.x, geometry.dipole_orientation.z,
               geometry.dipole_orientation.y};
    }
    const double out_of_plane = std::abs(uvw.z);
    Polarization2D pol;
    if (out_of_plane > 0.999) {
        pol = Polarization2D::OutOfPlaneE;
    } else if (out_of_plane < 1e-3) {
        pol = Polarization2D::OutOfPlaneH;
    } else {
        throw std::invalid_argument("2-D slice needs a dipole fully in or out of the plane");
    }

    Simulation2D::Params params;
    params.courant = config.courant;
    params.pml = config.pml;
    params.analysis_wavelength = geometry.emission_wavelength;
    Simulation2D sim(grid, pol, params);

    GaussianPulse pulse;
    pulse.wavelength = geometry.emission_wavelength;
    pulse.fractional_bandwidth = config.source.fractional_bandwidth;
    const double pos_u = e.x;
    const double pos_v = plane == SlicePlane::XY ? e.y : e.z;
    sim.add_dipole({pos_u, pos_v, 0.0}, uvw, pulse, config.source.amplitude);

    const MonitorLayout& lay = config.monitors;
    const double h = grid.cell_size;
    const double half_w = geometry.waveguide_width / 2;
    auto clamp_pixel = [&](double coord, double origin, int n) {
        return std::clamp(int(std::lround((coord - origin) / h)), 0, n);
    };

    int id_um, id_up, id_vm, id_vp;
    {
        const int iu_m = sim.node_u(-lay.waveguide_distance);
        const int iu_p = sim.node_u(+lay.waveguide_distance);
        int lo, hi, vm_index, vp_index, vlo, vhi;
        if (plane == SlicePlane::XY) {
            lo = clamp_pixel(-half_w - lay.waveguide_margin, grid.origin_v, grid.nv);
            hi = clamp_pixel(half_w + lay.waveguide_margin, grid.origin_v, grid.nv);
            vm_index = sim.node_v(-lay.waveguide_distance);
            vp_index = sim.node_v(+lay.waveguide_distance);
            vlo = clamp_pixel(-half_w - lay.waveguide_margin, grid.origin_u, grid.nu);
            vhi = clamp_pixel(half_w + lay.waveguide_margin, grid.origin_u, grid.nu);
        } else {
            lo = clamp_pixel(-lay.waveguide_margin, grid.origin_v, grid.nv);
            hi = clamp_pixel(geometry.waveguide_height + lay.waveguide_margin, grid.origin_v,
                             grid.nv);
            vm_index = sim.node_v(-lay.bottom_depth);
            vp_index = sim.node_v(geometry.waveguide_height + lay.top_standoff);
            const int inset = config.pml.thickness + 2;
            vlo = inset;
            vhi = grid.nu - inset;
        }
        id_um = sim.add_line_monitor("u-", 0, iu_m, lo, hi, -1.0);
        id_up = sim.add_line_monitor("u+", 0, iu_p, lo, hi, +1.0);
        id_vm = sim.add_line_monitor("v-", 1, vm_index, vlo, vhi, -1.0);
        id_vp = sim.add_line_monitor("v+", 1, vp_index, vlo, vhi, +1.0);
    }
    const std::vector<int> box = sim.add_source_box(sim.node_u(pos_u), sim.node_v(pos_v),
                                                    lay.source_box_offset_cells);

    Result2D result;
    result.polarization = pol;
    result.nu = grid.nu;
    result.nv = grid.nv;
    result.cell_size = h;
    result.origin_u = grid.origin_u;
    result.origin_v = grid.origin_v;

    std::function<void(const Simulation2D&)> hook;
    if (config.frame_interval > 0) {
        hook = [&result](const Simulation2D& s) {
            result.frames.push_back({s.step_index(), s.step_index() * s.dt(), s.scalar_field()});
        };
    }
    const auto outcome = sim.run(config.termination, hook, config.frame_interval);
    result.steps_run = outcome.steps;
    result.converged = outcome.converged;
    if (!outcome.converged)
        result.warnings.push_back("2-D run did not reach the energy decay threshold");

    result.p_u_minus = sim.flux(id_um);
    result.p_u_plus = sim.flux(id_up);
    result.p_v_minus = sim.flux(id_vm);
    result.p_v_plus = sim.flux(id_vp);
    result.p_total = 0.0;
    for (int id : box) result.p_total += sim.flux(id);
    if (result.p_total > 0.0) {
        result.waveguide_fraction = (result.p_u_minus + result.p_u_plus) / result.p_total;
    }
    return result;
}

}  // namespace wgqd::fdtd
