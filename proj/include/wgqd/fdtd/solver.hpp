#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgqd/constants.hpp"
#include "wgqd/fdtd/cpml.hpp"
#include "wgqd/fdtd/monitor.hpp"
#include "wgqd/fdtd/source.hpp"
#include "wgqd/geometry.hpp"

namespace wgqd::fdtd {

/// CFL-stable time step: dt = courant * cell_size / (c * sqrt(dimension)).
inline double cfl_timestep(double cell_size, int dimension, double courant) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");
    if (dimension != 1 && dimension != 2 && dimension != 3)
        throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (!(courant > 0.0) || courant > 1.0)
        throw std::invalid_argument("courant factor must lie in (0, 1]");
    return courant * cell_size / (speed_of_light * std::sqrt(double(dimension)));
}

struct StabilityError : std::runtime_error {
    explicit StabilityError(int step)
        : std::runtime_error("field divergence (non-finite energy) detected at step " +
                             std::to_string(step)),
          step_index(step) {}
    int step_index;
};

/// Yee-grid leapfrog solver with CPML boundaries, soft current sources and
/// single-frequency DFT monitors.
///
/// Component layout on cell (i,j,k) of the permittivity grid:
///   Ex (i+1/2, j, k)   Ey (i, j+1/2, k)   Ez (i, j, k+1/2)
///   Hx (i, j+1/2, k+1/2)   Hy (i+1/2, j, k+1/2)   Hz (i+1/2, j+1/2, k)
/// Arrays are padded to (nx+1)(ny+1)(nz+1); the outer boundary is PEC
/// (periodic axes wrap instead, for dispersion tests).
class Simulation3D {
public:
    struct Params {
        double courant = 0.95;
        PmlParams pml{};
        bool periodic_x = false, periodic_y = false, periodic_z = false;
        double analysis_wavelength = 705e-9;
        // Explicit time step override for stability experiments; <= 0 uses CFL.
        double dt_override = 0.0;
    };

    struct Termination {
        int max_steps = 60000;
        double decay_threshold = 1e-5;  // final/peak energy ratio
        int check_interval = 10;
    };

    struct RunOutcome {
        int steps = 0;
        bool converged = false;
        double peak_energy = 0.0;
        double final_energy = 0.0;
        double max_post_source_rise = 0.0;  // max energy ratio between checks after source off
    };

    Simulation3D(const PermittivityGrid& grid, const Params& params)
        : nx_(grid.nx), ny_(grid.ny), nz_(grid.nz), h_(grid.cell_size), origin_(grid.origin),
          periodic_{params.periodic_x, params.periodic_y, params.periodic_z},
          omega_(2.0 * pi * speed_of_light / params.analysis_wavelength) {
        dt_ = params.dt_override > 0.0 ? params.dt_override
                                       : cfl_timestep(h_, 3, params.courant);
        nj_ = ny_ + 1;
        nk_ = nz_ + 1;
        const std::size_t n = std::size_t(nx_ + 1) * nj_ * nk_;
        ex_.assign(n, 0.0);
        ey_.assign(n, 0.0);
        ez_.assign(n, 0.0);
        hx_.assign(n, 0.0);
        hy_.assign(n, 0.0);
        hz_.assign(n, 0.0);
        build_coefficients(grid);

        PmlParams off = params.pml;
        off.thickness = 0;
        pml_x_ = build_axis_pml(nx_, h_, dt_, periodic_[0] ? off : params.pml);
        pml_y_ = build_axis_pml(ny_, h_, dt_, periodic_[1] ? off : params.pml);
        pml_z_ = build_axis_pml(nz_, h_, dt_, periodic_[2] ? off : params.pml);
        allocate_psi();
        ch_ = dt_ / vacuum_permeability;
    }

    double dt() const { return dt_; }
    double cell_size() const { return h_; }
    int step_index() const { return step_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double omega() const { return omega_; }
    int pml_thickness() const { return pml_x_.thickness; }

    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(i) * nj_ + j) * nk_ + k;
    }

    double x_node(int i) const { return origin_.x + i * h_; }
    double y_node(int j) const { return origin_.y + j * h_; }
    double z_node(int k) const { return origin_.z + k * h_; }
    int nearest_node(double coord, double origin) const {
        return int(std::lround((coord - origin) / h_));
    }
    int node_i(double x) const { return nearest_node(x, origin_.x); }
    int node_j(double y) const { return nearest_node(y, origin_.y); }
    int node_k(double z) const { return nearest_node(z, origin_.z); }

    const std::vector<double>& ex() const { return ex_; }
    const std::vector<double>& ey() const { return ey_; }
    const std::vector<double>& ez() const { return ez_; }
    const std::vector<double>& hx() const { return hx_; }
    const std::vector<double>& hy() const { return hy_; }
    const std::vector<double>& hz() const { return hz_; }

    /// Registers a soft current source; injection weights are trilinear over
    /// the surrounding Yee nodes of each driven component.
    void add_dipole(const DipoleSource& source) {
        const double inv_cell_volume = 1.0 / (h_ * h_ * h_);
        auto add_component = [&](int comp, double direction) {
            if (direction == 0.0) return;
            // Node lattice offsets per component: 0.5 on its own axis.
            const double off[3] = {comp == 0 ? 0.5 : 0.0, comp == 1 ? 0.5 : 0.0,
                                   comp == 2 ? 0.5 : 0.0};
            const double fi = (source.position.x - origin_.x) / h_ - off[0];
            const double fj = (source.position.y - origin_.y) / h_ - off[1];
            const double fk = (source.position.z - origin_.z) / h_ - off[2];
            const int i0 = int(std::floor(fi)), j0 = int(std::floor(fj)),
                      k0 = int(std::floor(fk));
            const double wi = fi - i0, wj = fj - j0, wk = fk - k0;
            for (int di = 0; di < 2; ++di) {
                for (int dj = 0; dj < 2; ++dj) {
                    for (int dk = 0; dk < 2; ++dk) {
                        const double w = (di ? wi : 1.0 - wi) * (dj ? wj : 1.0 - wj) *
                                         (dk ? wk : 1.0 - wk);
                        if (w <= 0.0) continue;
                        const int i = i0 + di, j = j0 + dj, k = k0 + dk;
                        if (i < 0 || i > nx_ || j < 0 || j > ny_ || k < 0 || k > nz_)
                            throw std::invalid_argument("dipole source outside the grid");
                        injections_.push_back({comp, idx(i, j, k),
                                               source.amplitude * direction * w *
                                                   inv_cell_volume});
                    }
                }
            }
        };
        add_component(0, source.orientation.x);
        add_component(1, source.orientation.y);
        add_component(2, source.orientation.z);
        pulse_ = source.pulse;
        has_source_ = !injections_.empty();
        source_end_time_ = pulse_.end_time();
    }

    /// Plane monitor in node/pixel indices; returns the monitor id.
    int add_plane_monitor(std::string name, int axis, int node_index, int a_lo, int a_hi,
                          int b_lo, int b_hi, double sign) {
        PlaneMonitor m;
        m.name = std::move(name);
        m.axis = axis;
        m.index = node_index;
        m.a_lo = a_lo;
        m.a_hi = a_hi;
        m.b_lo = b_lo;
        m.b_hi = b_hi;
        m.sign = sign;
        m.omega = omega_;
        m.pixel_area = h_ * h_;
        const int n_axis[3] = {nx_, ny_, nz_};
        if (node_index < 1 || node_index > n_axis[axis] - 1)
            throw std::invalid_argument("monitor plane outside the grid");
        m.allocate();
        monitors_.push_back(std::move(m));
        return int(monitors_.size()) - 1;
    }

    /// Closed box of six outward-oriented planes, `offset_cells` from the
    /// given node center.
    BoxMonitor add_source_box(int ci, int cj, int ck, int offset_cells) {
        const int d = offset_cells;
        BoxMonitor box;
        box.face_ids[0] = add_plane_monitor("box-x", 0, ci - d, cj - d, cj + d, ck - d, ck + d, -1.0);
        box.face_ids[1] = add_plane_monitor("box+x", 0, ci + d, cj - d, cj + d, ck - d, ck + d, +1.0);
        box.face_ids[2] = add_plane_monitor("box-y", 1, cj - d, ck - d, ck + d, ci - d, ci + d, -1.0);
        box.face_ids[3] = add_plane_monitor("box+y", 1, cj + d, ck - d, ck + d, ci - d, ci + d, +1.0);
        box.face_ids[4] = add_plane_monitor("box-z", 2, ck - d, ci - d, ci + d, cj - d, cj + d, -1.0);
        box.face_ids[5] = add_plane_monitor("box+z", 2, ck + d, ci - d, ci + d, cj - d, cj + d, +1.0);
        return box;
    }

    const PlaneMonitor& monitor(int id) const { return monitors_[std::size_t(id)]; }
    std::vector<PlaneMonitor>& monitors() { return monitors_; }
    const std::vector<PlaneMonitor>& monitors() const { return monitors_; }

    double source_end_time() const { return has_source_ ? source_end_time_ : 0.0; }

    /// One full leapfrog step: H to t+dt/2, then E to t+dt, with monitor
    /// accumulation at the matching field times.
    void step() {
        if (periodic_[0] || periodic_[1] || periodic_[2]) sync_ghost_e();
        update_h();
        accumulate_monitors_h((step_ + 0.5) * dt_);
        update_e();
        inject_current((step_ + 0.5) * dt_);
        accumulate_monitors_e((step_ + 1.0) * dt_);
        ++step_;
    }

    RunOutcome run(const Termination& term) {
        RunOutcome out;
        double peak = 0.0;
        double prev_energy = -1.0;
        const double t_source_end = source_end_time();
        while (out.steps < term.max_steps) {
            step();
            ++out.steps;
            if (out.steps % term.check_interval != 0) continue;
            const double energy = total_energy();
            if (!std::isfinite(energy)) throw StabilityError(step_);
            peak = std::max(peak, energy);
            const bool source_off = step_ * dt_ > t_source_end;
            if (source_off) {
                if (prev_energy > 0.0 && energy > 0.0) {
                    out.max_post_source_rise =
                        std::max(out.max_post_source_rise, energy / prev_energy);
                }
                prev_energy = energy;
                if (peak > 0.0 && energy <= term.decay_threshold * peak) {
                    out.converged = true;
                    out.final_energy = energy;
                    out.peak_energy = peak;
                    return out;
                }
            }
        }
        out.final_energy = total_energy();
        if (!std::isfinite(out.final_energy)) throw StabilityError(step_);
        out.peak_energy = peak;
        out.converged = !has_source_ && out.final_energy == 0.0;
        return out;
    }

    /// Total electromagnetic field energy, integrated over the grid
    /// (including PML regions). Deterministic serial reduction.
    double total_energy() const {
        double acc = 0.0;
        const double cell_volume = h_ * h_ * h_;
        for (int i = 0; i < nx_; ++i) {
            for (int j = 0; j < ny_; ++j) {
                const std::size_t row = idx(i, j, 0);
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = row + k;
                    double e = 0.0;
                    if (ce_x_[q] > 0.0) e += (dt_ / ce_x_[q]) * ex_[q] * ex_[q];
                    if (ce_y_[q] > 0.0) e += (dt_ / ce_y_[q]) * ey_[q] * ey_[q];
                    if (ce_z_[q] > 0.0) e += (dt_ / ce_z_[q]) * ez_[q] * ez_[q];
                    const double h2 = hx_[q] * hx_[q] + hy_[q] * hy_[q] + hz_[q] * hz_[q];
                    acc += 0.5 * (e + vacuum_permeability * h2) * cell_volume;
                }
            }
        }
        return acc;
    }

private:
    struct Injection {
        int component;
        std::size_t index;
        double coefficient;  // current density per unit pulse value
    };

    void build_coefficients(const PermittivityGrid& grid) {
        const std::size_t n = ex_.size();
        ce_x_.assign(n, 0.0);
        ce_y_.assign(n, 0.0);
        ce_z_.assign(n, 0.0);
        auto cell = [&](int i, int j, int k) {
            i = std::clamp(i, 0, nx_ - 1);
            j = std::clamp(j, 0, ny_ - 1);
            k = std::clamp(k, 0, nz_ - 1);
            return grid.eps[grid.index(i, j, k)];
        };
        // Four-cell averages onto each E-edge; x-adjacent cells are summed
        // pairwise first so x-mirrored edges get bit-identical coefficients.
        for (int i = 0; i <= nx_; ++i) {
            for (int j = 0; j <= ny_; ++j) {
                for (int k = 0; k <= nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    if (i < nx_) {
                        const double eps = 0.25 * ((cell(i, j - 1, k - 1) + cell(i, j - 1, k)) +
                                                   (cell(i, j, k - 1) + cell(i, j, k)));
                        ce_x_[q] = dt_ / (vacuum_permittivity * eps);
                    }
                    if (j < ny_) {
                        const double eps = 0.25 * ((cell(i - 1, j, k - 1) + cell(i - 1, j, k)) +
                                                   (cell(i, j, k - 1) + cell(i, j, k)));
                        ce_y_[q] = dt_ / (vacuum_permittivity * eps);
                    }
                    if (k < nz_) {
                        const double eps = 0.25 * ((cell(i - 1, j - 1, k) + cell(i - 1, j, k)) +
                                                   (cell(i, j - 1, k) + cell(i, j, k)));
                        ce_z_[q] = dt_ / (vacuum_permittivity * eps);
                    }
                }
            }
        }
    }

    void allocate_psi() {
        const int t1 = pml_x_.thickness + 1;
        const std::size_t x_slab = std::size_t(t1) * nj_ * nk_;
        const int t2 = pml_y_.thickness + 1;
        const std::size_t y_slab = std::size_t(t2) * (nx_ + 1) * nk_;
        const int t3 = pml_z_.thickness + 1;
        const std::size_t z_slab = std::size_t(t3) * (nx_ + 1) * nj_;
        for (auto* v : {&psi_ey_x_lo_, &psi_ey_x_hi_, &psi_ez_x_lo_, &psi_ez_x_hi_,
                        &psi_hy_x_lo_, &psi_hy_x_hi_, &psi_hz_x_lo_, &psi_hz_x_hi_})
            v->assign(pml_x_.thickness > 0 ? x_slab : 0, 0.0);
        for (auto* v : {&psi_ex_y_lo_, &psi_ex_y_hi_, &psi_ez_y_lo_, &psi_ez_y_hi_,
                        &psi_hx_y_lo_, &psi_hx_y_hi_, &psi_hz_y_lo_, &psi_hz_y_hi_})
            v->assign(pml_y_.thickness > 0 ? y_slab : 0, 0.0);
        for (auto* v : {&psi_ex_z_lo_, &psi_ex_z_hi_, &psi_ey_z_lo_, &psi_ey_z_hi_,
                        &psi_hx_z_lo_, &psi_hx_z_hi_, &psi_hy_z_lo_, &psi_hy_z_hi_})
            v->assign(pml_z_.thickness > 0 ? z_slab : 0, 0.0);
    }

    std::size_t idx_xslab(int layer, int j, int k) const {
        return (std::size_t(layer) * nj_ + j) * nk_ + k;
    }
    std::size_t idx_yslab(int layer, int i, int k) const {
        return (std::size_t(layer) * (nx_ + 1) + i) * nk_ + k;
    }
    std::size_t idx_zslab(int layer, int i, int j) const {
        return (std::size_t(layer) * (nx_ + 1) + i) * nj_ + j;
    }

    void sync_ghost_e() {
        if (periodic_[0]) {
            for (int j = 0; j <= ny_; ++j)
                for (int k = 0; k <= nz_; ++k) {
                    ey_[idx(nx_, j, k)] = ey_[idx(0, j, k)];
                    ez_[idx(nx_, j, k)] = ez_[idx(0, j, k)];
                }
        }
        if (periodic_[1]) {
            for (int i = 0; i <= nx_; ++i)
                for (int k = 0; k <= nz_; ++k) {
                    ex_[idx(i, ny_, k)] = ex_[idx(i, 0, k)];
                    ez_[idx(i, ny_, k)] = ez_[idx(i, 0, k)];
                }
        }
        if (periodic_[2]) {
            for (int i = 0; i <= nx_; ++i)
                for (int j = 0; j <= ny_; ++j) {
                    ex_[idx(i, j, nz_)] = ex_[idx(i, j, 0)];
                    ey_[idx(i, j, nz_)] = ey_[idx(i, j, 0)];
                }
        }
    }

    void update_h() {
        const double inv_h = 1.0 / h_;
        const double ch = ch_;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i <= nx_; ++i) {
            for (int j = 0; j < ny_; ++j) {
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    hx_[q] -= ch * ((ez_[q + nk_] - ez_[q]) - (ey_[q + 1] - ey_[q])) * inv_h;
                }
            }
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i < nx_; ++i) {
            for (int j = 0; j <= ny_; ++j) {
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    hy_[q] -= ch * ((ex_[q + 1] - ex_[q]) -
                                    (ez_[q + std::size_t(nj_) * nk_] - ez_[q])) *
                              inv_h;
                }
            }
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i < nx_; ++i) {
            for (int j = 0; j < ny_; ++j) {
                for (int k = 0; k <= nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    hz_[q] -= ch * ((ey_[q + std::size_t(nj_) * nk_] - ey_[q]) -
                                    (ex_[q + nk_] - ex_[q])) *
                              inv_h;
                }
            }
        }
        apply_pml_h();
    }

    void update_e() {
        const double inv_h = 1.0 / h_;
        const std::size_t si = std::size_t(nj_) * nk_;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 0; i < nx_; ++i) {
            for (int j = 1; j < ny_; ++j) {
                for (int k = 1; k < nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    ex_[q] += ce_x_[q] * ((hz_[q] - hz_[q - nk_]) - (hy_[q] - hy_[q - 1])) * inv_h;
                }
            }
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 1; i < nx_; ++i) {
            for (int j = 0; j < ny_; ++j) {
                for (int k = 1; k < nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    ey_[q] += ce_y_[q] * ((hx_[q] - hx_[q - 1]) - (hz_[q] - hz_[q - si])) * inv_h;
                }
            }
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = 1; i < nx_; ++i) {
            for (int j = 1; j < ny_; ++j) {
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = idx(i, j, k);
                    ez_[q] += ce_z_[q] * ((hy_[q] - hy_[q - si]) - (hx_[q] - hx_[q - nk_])) * inv_h;
                }
            }
        }
        update_e_periodic_boundaries();
        apply_pml_e();
    }

    // Periodic wrap for the E planes the interior loops skip. Only used by
    // dispersion tests; PML axes never enter here.
    void update_e_periodic_boundaries() {
        const double inv_h = 1.0 / h_;
        const std::size_t si = std::size_t(nj_) * nk_;
        if (periodic_[0]) {
            const std::size_t wrap = std::size_t(nx_ - 1) * si;
            for (int j = 0; j < ny_; ++j) {
                for (int k = 1; k < nz_; ++k) {
                    const std::size_t q = idx(0, j, k);
                    ey_[q] += ce_y_[q] * ((hx_[q] - hx_[q - 1]) - (hz_[q] - hz_[q + wrap])) * inv_h;
                }
            }
            for (int j = 1; j < ny_; ++j) {
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = idx(0, j, k);
                    ez_[q] += ce_z_[q] * ((hy_[q] - hy_[q + wrap]) - (hx_[q] - hx_[q - nk_])) * inv_h;
                }
            }
        }
        if (periodic_[1]) {
            const std::size_t wrap = std::size_t(ny_ - 1) * nk_;
            for (int i = 0; i < nx_; ++i) {
                for (int k = 1; k < nz_; ++k) {
                    const std::size_t q = idx(i, 0, k);
                    ex_[q] += ce_x_[q] * ((hz_[q] - hz_[q + wrap]) - (hy_[q] - hy_[q - 1])) * inv_h;
                }
            }
            for (int i = 1; i < nx_; ++i) {
                for (int k = 0; k < nz_; ++k) {
                    const std::size_t q = idx(i, 0, k);
                    ez_[q] += ce_z_[q] * ((hy_[q] - hy_[q - si]) - (hx_[q] - hx_[q + wrap])) * inv_h;
                }
            }
        }
        if (periodic_[2]) {
            const std::size_t wrap = std::size_t(nz_ - 1);
            for (int i = 0; i < nx_; ++i) {
                for (int j = 1; j < ny_; ++j) {
                    const std::size_t q = idx(i, j, 0);
                    ex_[q] += ce_x_[q] * ((hz_[q] - hz_[q - nk_]) - (hy_[q] - hy_[q + wrap])) * inv_h;
                }
            }
            for (int i = 1; i < nx_; ++i) {
                for (int j = 0; j < ny_; ++j) {
                    const std::size_t q = idx(i, j, 0);
                    ey_[q] += ce_y_[q] * ((hx_[q] - hx_[q + wrap]) - (hz_[q] - hz_[q - si])) * inv_h;
                }
            }
        }
    }

    void apply_pml_e() {
        const double inv_h = 1.0 / h_;
        const std::size_t si = std::size_t(nj_) * nk_;
        const int tx = pml_x_.thickness, ty = pml_y_.thickness, tz = pml_z_.thickness;

        if (tx > 0) {
            // d/dx corrections in the x slabs: Ey (dHz/dx), Ez (dHy/dx).
            auto pass = [&](bool hi_side) {
                const int i_begin = hi_side ? nx_ - tx : 1;
                const int i_end = hi_side ? nx_ - 1 : tx;
                std::vector<double>& pey = hi_side ? psi_ey_x_hi_ : psi_ey_x_lo_;
                std::vector<double>& pez = hi_side ? psi_ez_x_hi_ : psi_ez_x_lo_;
                for (int i = i_begin; i <= i_end; ++i) {
                    const int layer = hi_side ? i - (nx_ - tx) : i;
                    const double be = pml_x_.b_e[std::size_t(i)];
                    const double cc = pml_x_.c_e[std::size_t(i)];
                    const double ik1 = pml_x_.inv_kappa_e[std::size_t(i)] - 1.0;
                    for (int j = 0; j < ny_; ++j) {
                        for (int k = 1; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_xslab(layer, j, k);
                            const double d = -(hz_[q] - hz_[q - si]) * inv_h;
                            pey[p] = be * pey[p] + cc * d;
                            ey_[q] += ce_y_[q] * (ik1 * d + pey[p]);
                        }
                    }
                    for (int j = 1; j < ny_; ++j) {
                        for (int k = 0; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_xslab(layer, j, k);
                            const double d = (hy_[q] - hy_[q - si]) * inv_h;
                            pez[p] = be * pez[p] + cc * d;
                            ez_[q] += ce_z_[q] * (ik1 * d + pez[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
        if (ty > 0) {
            // d/dy corrections: Ex (dHz/dy), Ez (dHx/dy).
            auto pass = [&](bool hi_side) {
                const int j_begin = hi_side ? ny_ - ty : 1;
                const int j_end = hi_side ? ny_ - 1 : ty;
                std::vector<double>& pex = hi_side ? psi_ex_y_hi_ : psi_ex_y_lo_;
                std::vector<double>& pez = hi_side ? psi_ez_y_hi_ : psi_ez_y_lo_;
                for (int j = j_begin; j <= j_end; ++j) {
                    const int layer = hi_side ? j - (ny_ - ty) : j;
                    const double be = pml_y_.b_e[std::size_t(j)];
                    const double cc = pml_y_.c_e[std::size_t(j)];
                    const double ik1 = pml_y_.inv_kappa_e[std::size_t(j)] - 1.0;
                    for (int i = 0; i < nx_; ++i) {
                        for (int k = 1; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_yslab(layer, i, k);
                            const double d = (hz_[q] - hz_[q - nk_]) * inv_h;
                            pex[p] = be * pex[p] + cc * d;
                            ex_[q] += ce_x_[q] * (ik1 * d + pex[p]);
                        }
                    }
                    for (int i = 1; i < nx_; ++i) {
                        for (int k = 0; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_yslab(layer, i, k);
                            const double d = -(hx_[q] - hx_[q - nk_]) * inv_h;
                            pez[p] = be * pez[p] + cc * d;
                            ez_[q] += ce_z_[q] * (ik1 * d + pez[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
        if (tz > 0) {
            // d/dz corrections: Ex (dHy/dz), Ey (dHx/dz).
            auto pass = [&](bool hi_side) {
                const int k_begin = hi_side ? nz_ - tz : 1;
                const int k_end = hi_side ? nz_ - 1 : tz;
                std::vector<double>& pex = hi_side ? psi_ex_z_hi_ : psi_ex_z_lo_;
                std::vector<double>& pey = hi_side ? psi_ey_z_hi_ : psi_ey_z_lo_;
                for (int k = k_begin; k <= k_end; ++k) {
                    const int layer = hi_side ? k - (nz_ - tz) : k;
                    const double be = pml_z_.b_e[std::size_t(k)];
                    const double cc = pml_z_.c_e[std::size_t(k)];
                    const double ik1 = pml_z_.inv_kappa_e[std::size_t(k)] - 1.0;
                    for (int i = 0; i < nx_; ++i) {
                        for (int j = 1; j < ny_; ++j) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_zslab(layer, i, j);
                            const double d = -(hy_[q] - hy_[q - 1]) * inv_h;
                            pex[p] = be * pex[p] + cc * d;
                            ex_[q] += ce_x_[q] * (ik1 * d + pex[p]);
                        }
                    }
                    for (int i = 1; i < nx_; ++i) {
                        for (int j = 0; j < ny_; ++j) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_zslab(layer, i, j);
                            const double d = (hx_[q] - hx_[q - 1]) * inv_h;
                            pey[p] = be * pey[p] + cc * d;
                            ey_[q] += ce_y_[q] * (ik1 * d + pey[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
    }

    void apply_pml_h() {
        const double inv_h = 1.0 / h_;
        const double ch = ch_;
        const std::size_t si = std::size_t(nj_) * nk_;
        const int tx = pml_x_.thickness, ty = pml_y_.thickness, tz = pml_z_.thickness;

        if (tx > 0) {
            // d/dx corrections at half positions: Hy (dEz/dx), Hz (dEy/dx).
            auto pass = [&](bool hi_side) {
                const int i_begin = hi_side ? nx_ - tx : 0;
                const int i_end = hi_side ? nx_ - 1 : tx - 1;
                std::vector<double>& phy = hi_side ? psi_hy_x_hi_ : psi_hy_x_lo_;
                std::vector<double>& phz = hi_side ? psi_hz_x_hi_ : psi_hz_x_lo_;
                for (int i = i_begin; i <= i_end; ++i) {
                    const int layer = hi_side ? i - (nx_ - tx) : i;
                    const double bh = pml_x_.b_h[std::size_t(i)];
                    const double cc = pml_x_.c_h[std::size_t(i)];
                    const double ik1 = pml_x_.inv_kappa_h[std::size_t(i)] - 1.0;
                    for (int j = 0; j <= ny_; ++j) {
                        for (int k = 0; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_xslab(layer, j, k);
                            const double d = -(ez_[q + si] - ez_[q]) * inv_h;
                            phy[p] = bh * phy[p] + cc * d;
                            hy_[q] -= ch * (ik1 * d + phy[p]);
                        }
                    }
                    for (int j = 0; j < ny_; ++j) {
                        for (int k = 0; k <= nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_xslab(layer, j, k);
                            const double d = (ey_[q + si] - ey_[q]) * inv_h;
                            phz[p] = bh * phz[p] + cc * d;
                            hz_[q] -= ch * (ik1 * d + phz[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
        if (ty > 0) {
            // d/dy corrections: Hx (dEz/dy), Hz (dEx/dy).
            auto pass = [&](bool hi_side) {
                const int j_begin = hi_side ? ny_ - ty : 0;
                const int j_end = hi_side ? ny_ - 1 : ty - 1;
                std::vector<double>& phx = hi_side ? psi_hx_y_hi_ : psi_hx_y_lo_;
                std::vector<double>& phz = hi_side ? psi_hz_y_hi_ : psi_hz_y_lo_;
                for (int j = j_begin; j <= j_end; ++j) {
                    const int layer = hi_side ? j - (ny_ - ty) : j;
                    const double bh = pml_y_.b_h[std::size_t(j)];
                    const double cc = pml_y_.c_h[std::size_t(j)];
                    const double ik1 = pml_y_.inv_kappa_h[std::size_t(j)] - 1.0;
                    for (int i = 0; i <= nx_; ++i) {
                        for (int k = 0; k < nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_yslab(layer, i, k);
                            const double d = (ez_[q + nk_] - ez_[q]) * inv_h;
                            phx[p] = bh * phx[p] + cc * d;
                            hx_[q] -= ch * (ik1 * d + phx[p]);
                        }
                    }
                    for (int i = 0; i < nx_; ++i) {
                        for (int k = 0; k <= nz_; ++k) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_yslab(layer, i, k);
                            const double d = -(ex_[q + nk_] - ex_[q]) * inv_h;
                            phz[p] = bh * phz[p] + cc * d;
                            hz_[q] -= ch * (ik1 * d + phz[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
        if (tz > 0) {
            // d/dz corrections: Hx (dEy/dz), Hy (dEx/dz).
            auto pass = [&](bool hi_side) {
                const int k_begin = hi_side ? nz_ - tz : 0;
                const int k_end = hi_side ? nz_ - 1 : tz - 1;
                std::vector<double>& phx = hi_side ? psi_hx_z_hi_ : psi_hx_z_lo_;
                std::vector<double>& phy = hi_side ? psi_hy_z_hi_ : psi_hy_z_lo_;
                for (int k = k_begin; k <= k_end; ++k) {
                    const int layer = hi_side ? k - (nz_ - tz) : k;
                    const double bh = pml_z_.b_h[std::size_t(k)];
                    const double cc = pml_z_.c_h[std::size_t(k)];
                    const double ik1 = pml_z_.inv_kappa_h[std::size_t(k)] - 1.0;
                    for (int i = 0; i <= nx_; ++i) {
                        for (int j = 0; j < ny_; ++j) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_zslab(layer, i, j);
                            const double d = -(ey_[q + 1] - ey_[q]) * inv_h;
                            phx[p] = bh * phx[p] + cc * d;
                            hx_[q] -= ch * (ik1 * d + phx[p]);
                        }
                    }
                    for (int i = 0; i < nx_; ++i) {
                        for (int j = 0; j <= ny_; ++j) {
                            const std::size_t q = idx(i, j, k);
                            const std::size_t p = idx_zslab(layer, i, j);
                            const double d = (ex_[q + 1] - ex_[q]) * inv_h;
                            phy[p] = bh * phy[p] + cc * d;
                            hy_[q] -= ch * (ik1 * d + phy[p]);
                        }
                    }
                }
            };
            pass(false);
            pass(true);
        }
    }

    // Soft source: E -= (dt/eps) * J with J the current density at the node.
    void inject_current(double t) {
        if (!has_source_) return;
        const double j_t = pulse_.value(t);
        for (const Injection& inj : injections_) {
            const double j_density = inj.coefficient * j_t;
            switch (inj.component) {
                case 0: ex_[inj.index] -= ce_x_[inj.index] * j_density; break;
                case 1: ey_[inj.index] -= ce_y_[inj.index] * j_density; break;
                case 2: ez_[inj.index] -= ce_z_[inj.index] * j_density; break;
            }
        }
    }

    void accumulate_monitors_h(double t) {
        const double phase = -omega_ * t;
        const std::complex<double> w{std::cos(phase) * dt_, std::sin(phase) * dt_};
        const std::size_t si = std::size_t(nj_) * nk_;
        for (PlaneMonitor& m : monitors_) {
            const int I = m.index;
            if (m.axis == 0) {
                // tangential H at pixel centers (I, j+1/2, k+1/2): Hy, Hz.
                for (int j = m.a_lo; j < m.a_hi; ++j) {
                    for (int k = m.b_lo; k < m.b_hi; ++k) {
                        const std::size_t q = idx(I, j, k);
                        const double hyv = 0.25 * ((hy_[q - si] + hy_[q - si + nk_]) +
                                                   (hy_[q] + hy_[q + nk_]));
                        const double hzv = 0.25 * ((hz_[q - si] + hz_[q - si + 1]) +
                                                   (hz_[q] + hz_[q + 1]));
                        const std::size_t p = m.pixel_index(j, k);
                        m.h_t1[p] += hyv * w;  // t1 = y
                        m.h_t2[p] += hzv * w;  // t2 = z
                    }
                }
            } else if (m.axis == 1) {
                // plane y = I: tangential (t1, t2) = (z, x): Hz, Hx at (i+1/2, I, k+1/2).
                for (int k = m.a_lo; k < m.a_hi; ++k) {
                    for (int i = m.b_lo; i < m.b_hi; ++i) {
                        const std::size_t q = idx(i, I, k);
                        const double hzv = 0.25 * ((hz_[q - nk_] + hz_[q]) +
                                                   (hz_[q - nk_ + 1] + hz_[q + 1]));
                        const double hxv = 0.25 * ((hx_[q - nk_] + hx_[q]) +
                                                   (hx_[q - nk_ + si] + hx_[q + si]));
                        const std::size_t p =
                            std::size_t(k - m.a_lo) * std::size_t(m.pixels_b()) +
                            std::size_t(i - m.b_lo);
                        m.h_t1[p] += hzv * w;  // t1 = z
                        m.h_t2[p] += hxv * w;  // t2 = x
                    }
                }
            } else {
                // plane z = I: (t1, t2) = (x, y): Hx, Hy at (i+1/2, j+1/2, I).
                for (int i = m.a_lo; i < m.a_hi; ++i) {
                    for (int j = m.b_lo; j < m.b_hi; ++j) {
                        const std::size_t q = idx(i, j, I);
                        const double hxv = 0.25 * ((hx_[q - 1] + hx_[q]) +
                                                   (hx_[q - 1 + si] + hx_[q + si]));
                        const double hyv = 0.25 * ((hy_[q - 1] + hy_[q]) +
                                                   (hy_[q - 1 + nk_] + hy_[q + nk_]));
                        const std::size_t p = m.pixel_index(i, j);
                        m.h_t1[p] += hxv * w;
                        m.h_t2[p] += hyv * w;
                    }
                }
            }
        }
    }

    void accumulate_monitors_e(double t) {
        const double phase = -omega_ * t;
        const std::complex<double> w{std::cos(phase) * dt_, std::sin(phase) * dt_};
        const std::size_t si = std::size_t(nj_) * nk_;
        for (PlaneMonitor& m : monitors_) {
            const int I = m.index;
            if (m.axis == 0) {
                // tangential E at pixel centers: Ey, Ez.
                for (int j = m.a_lo; j < m.a_hi; ++j) {
                    for (int k = m.b_lo; k < m.b_hi; ++k) {
                        const std::size_t q = idx(I, j, k);
                        const double eyv = 0.5 * (ey_[q] + ey_[q + 1]);
                        const double ezv = 0.5 * (ez_[q] + ez_[q + nk_]);
                        const std::size_t p = m.pixel_index(j, k);
                        m.e_t1[p] += eyv * w;
                        m.e_t2[p] += ezv * w;
                    }
                }
            } else if (m.axis == 1) {
                for (int k = m.a_lo; k < m.a_hi; ++k) {
                    for (int i = m.b_lo; i < m.b_hi; ++i) {
                        const std::size_t q = idx(i, I, k);
                        const double ezv = 0.5 * (ez_[q] + ez_[q + si]);
                        const double exv = 0.5 * (ex_[q] + ex_[q + 1]);
                        const std::size_t p =
                            std::size_t(k - m.a_lo) * std::size_t(m.pixels_b()) +
                            std::size_t(i - m.b_lo);
                        m.e_t1[p] += ezv * w;
                        m.e_t2[p] += exv * w;
                    }
                }
            } else {
                for (int i = m.a_lo; i < m.a_hi; ++i) {
                    for (int j = m.b_lo; j < m.b_hi; ++j) {
                        const std::size_t q = idx(i, j, I);
                        const double exv = 0.5 * (ex_[q] + ex_[q + nk_]);
                        const double eyv = 0.5 * (ey_[q] + ey_[q + si]);
                        const std::size_t p = m.pixel_index(i, j);
                        m.e_t1[p] += exv * w;
                        m.e_t2[p] += eyv * w;
                    }
                }
            }
        }
    }

    int nx_, ny_, nz_;
    int nj_ = 0, nk_ = 0;
    double h_;
    Vec3 origin_;
    bool periodic_[3];
    double omega_;
    double dt_ = 0.0;
    double ch_ = 0.0;
    int step_ = 0;

    std::vector<double> ex_, ey_, ez_, hx_, hy_, hz_;
    std::vector<double> ce_x_, ce_y_, ce_z_;

    AxisPml pml_x_, pml_y_, pml_z_;
    std::vector<double> psi_ey_x_lo_, psi_ey_x_hi_, psi_ez_x_lo_, psi_ez_x_hi_;
    std::vector<double> psi_hy_x_lo_, psi_hy_x_hi_, psi_hz_x_lo_, psi_hz_x_hi_;
    std::vector<double> psi_ex_y_lo_, psi_ex_y_hi_, psi_ez_y_lo_, psi_ez_y_hi_;
    std::vector<double> psi_hx_y_lo_, psi_hx_y_hi_, psi_hz_y_lo_, psi_hz_y_hi_;
    std::vector<double> psi_ex_z_lo_, psi_ex_z_hi_, psi_ey_z_lo_, psi_ey_z_hi_;
    std::vector<double> psi_hx_z_lo_, psi_hx_z_hi_, psi_hy_z_lo_, psi_hy_z_hi_;

    GaussianPulse pulse_;
    bool has_source_ = false;
    double source_end_time_ = 0.0;
    std::vector<Injection> injections_;
    std::vector<PlaneMonitor> monitors_;
};

}  // namespace wgqd::fdtd
