#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgqd/constants.hpp"
#include "wgqd/fdtd/cpml.hpp"
#include "wgqd/fdtd/solver.hpp"
#include "wgqd/fdtd/source.hpp"
#include "wgqd/geometry.hpp"

namespace wgqd::fdtd {

/// Cell-centered permittivity on a 2-D slice through the device.
struct SliceGrid {
    double cell_size = 0.0;
    int nu = 0, nv = 0;
    double origin_u = 0.0, origin_v = 0.0;
    std::vector<double> eps;

    std::size_t index(int i, int j) const { return std::size_t(i) * nv + j; }
    double at(int i, int j) const { return eps[index(i, j)]; }
};

enum class SlicePlane { XY, XZ };

/// In-plane 4x4 sub-sampled rasterization at the slice coordinate.
inline SliceGrid rasterize_slice(const DeviceGeometry& g, SlicePlane plane, double slice_coord,
                                 double cell_size) {
    const GeometryReport report = validate_geometry(g);
    if (!report.ok()) throw std::invalid_argument(report.to_string());
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");

    SliceGrid grid;
    grid.cell_size = cell_size;
    const double extent_u = g.domain_extent.x;
    const double extent_v = plane == SlicePlane::XY ? g.domain_extent.y : g.domain_extent.z;
    grid.nu = wgqd::detail::snapped_cells(extent_u, cell_size);
    grid.nv = wgqd::detail::snapped_cells(extent_v, cell_size);
    grid.origin_u = -0.5 * grid.nu * cell_size;
    grid.origin_v = plane == SlicePlane::XY ? -0.5 * grid.nv * cell_size : g.domain_z_min();
    grid.eps.assign(std::size_t(grid.nu) * grid.nv, 1.0);

    const GeometrySampler sampler(g);
    constexpr int kSub = 4;
    double offs[kSub];
    for (int s = 0; s < kSub; ++s) offs[s] = double(2 * s + 1 - kSub) / double(2 * kSub);

    for (int i = 0; i < grid.nu; ++i) {
        const double uc = grid.origin_u + (i + 0.5) * cell_size;
        for (int j = 0; j < grid.nv; ++j) {
            const double vc = grid.origin_v + (j + 0.5) * cell_size;
            double acc = 0.0;
            for (int b = 0; b < kSub; ++b)
                for (int a = 0; a < kSub / 2; ++a) {
                    const double v = vc + offs[b] * cell_size;
                    auto sample = [&](double u) {
                        return plane == SlicePlane::XY ? sampler.eps_at(u, v, slice_coord)
                                                       : sampler.eps_at(u, slice_coord, v);
                    };
                    acc += sample(uc + offs[a] * cell_size) +
                           sample(uc + offs[kSub - 1 - a] * cell_size);
                }
            grid.eps[grid.index(i, j)] = acc / double(kSub * kSub);
        }
    }
    return grid;
}

/// Scalar-field polarization of a 2-D solve: either the E field or the H
/// field points out of the plane.
enum class Polarization2D { OutOfPlaneE, OutOfPlaneH };

struct LineMonitor {
    std::string name;
    int axis = 0;   // normal: 0 = u, 1 = v
    int index = 0;  // node index along the normal
    int lo = 0, hi = 0;  // pixel range along the line
    double sign = 1.0;
    std::vector<std::complex<double>> e_tan, h_tan;  // co-located at pixel centers

    std::size_t pixels() const { return std::size_t(hi - lo); }
};

/// 2-D Yee solver sharing the CPML and source machinery of the 3-D code.
///
/// OutOfPlaneE: fields (Ew; Hu, Hv), Ew on integer nodes.
/// OutOfPlaneH: fields (Hw; Eu, Ev), Hw on cell centers.
class Simulation2D {
public:
    struct Params {
        double courant = 0.95;
        PmlParams pml{};
        double analysis_wavelength = 705e-9;
        double dt_override = 0.0;
    };

    Simulation2D(const SliceGrid& grid, Polarization2D pol, const Params& params)
        : nu_(grid.nu), nv_(grid.nv), h_(grid.cell_size), ou_(grid.origin_u),
          ov_(grid.origin_v), pol_(pol),
          omega_(2.0 * pi * speed_of_light / params.analysis_wavelength) {
        dt_ = params.dt_override > 0.0 ? params.dt_override
                                       : cfl_timestep(h_, 2, params.courant);
        nj_ = nv_ + 1;
        const std::size_t n = std::size_t(nu_ + 1) * nj_;
        fw_.assign(n, 0.0);
        fu_.assign(n, 0.0);
        fv_.assign(n, 0.0);
        ce_w_.assign(n, 0.0);
        ce_u_.assign(n, 0.0);
        ce_v_.assign(n, 0.0);
        psi_fu_v_.assign(n, 0.0);
        psi_fv_u_.assign(n, 0.0);
        psi_fw_u_.assign(n, 0.0);
        psi_fw_v_.assign(n, 0.0);
        build_coefficients(grid);
        pml_u_ = build_axis_pml(nu_, h_, dt_, params.pml);
        pml_v_ = build_axis_pml(nv_, h_, dt_, params.pml);
        ch_ = dt_ / vacuum_permeability;
    }

    double dt() const { return dt_; }
    int step_index() const { return step_; }
    double cell_size() const { return h_; }
    int nu() const { return nu_; }
    int nv() const { return nv_; }
    Polarization2D polarization() const { return pol_; }

    std::size_t idx(int i, int j) const { return std::size_t(i) * nj_ + j; }
    int node_u(double u) const { return int(std::lround((u - ou_) / h_)); }
    int node_v(double v) const { return int(std::lround((v - ov_) / h_)); }
    double u_node(int i) const { return ou_ + i * h_; }
    double v_node(int j) const { return ov_ + j * h_; }

    /// Out-of-plane scalar field snapshot (Ew or Hw, by polarization) at
    /// cell centers, row-major over (u, v).
    std::vector<double> scalar_field() const {
        std::vector<double> out(std::size_t(nu_) * nv_, 0.0);
        for (int i = 0; i < nu_; ++i) {
            for (int j = 0; j < nv_; ++j) {
                if (pol_ == Polarization2D::OutOfPlaneE) {
                    // average the four surrounding nodes onto the cell center
                    out[std::size_t(i) * nv_ + j] =
                        0.25 * ((fw_[idx(i, j)] + fw_[idx(i, j + 1)]) +
                                (fw_[idx(i + 1, j)] + fw_[idx(i + 1, j + 1)]));
                } else {
                    out[std::size_t(i) * nv_ + j] = fw_[idx(i, j)];
                }
            }
        }
        return out;
    }

    /// Point source: drives the out-of-plane field (OutOfPlaneE) or the
    /// in-plane E components (OutOfPlaneH) with trilinear-in-plane weights.
    void add_dipole(Vec3 in_plane_position_uv, Vec3 orientation_uvw, const GaussianPulse& pulse,
                    double amplitude) {
        const double inv_area = 1.0 / (h_ * h_);
        auto add = [&](int comp, double direction, double off_u, double off_v) {
            if (direction == 0.0) return;
            const double fi = (in_plane_position_uv.x - ou_) / h_ - off_u;
            const double fj = (in_plane_position_uv.y - ov_) / h_ - off_v;
            const int i0 = int(std::floor(fi)), j0 = int(std::floor(fj));
            const double wi = fi - i0, wj = fj - j0;
            for (int di = 0; di < 2; ++di) {
                for (int dj = 0; dj < 2; ++dj) {
                    const double w = (di ? wi : 1.0 - wi) * (dj ? wj : 1.0 - wj);
                    if (w <= 0.0) continue;
                    injections_.push_back({comp, idx(i0 + di, j0 + dj),
                                           amplitude * direction * w * inv_area});
                }
            }
        };
        if (pol_ == Polarization2D::OutOfPlaneE) {
            if (std::abs(orientation_uvw.z) < 0.999)
                throw std::invalid_argument("OutOfPlaneE solve needs an out-of-plane dipole");
            add(2, orientation_uvw.z, 0.0, 0.0);  // Ew on integer nodes
        } else {
            if (std::abs(orientation_uvw.z) > 1e-3)
                throw std::invalid_argument("OutOfPlaneH solve needs an in-plane dipole");
            add(0, orientation_uvw.x, 0.5, 0.0);  // Eu at (i+1/2, j)
            add(1, orientation_uvw.y, 0.0, 0.5);  // Ev at (i, j+1/2)
        }
        pulse_ = pulse;
        has_source_ = !injections_.empty();
    }

    int add_line_monitor(std::string name, int axis, int node_index, int lo, int hi,
                         double sign) {
        LineMonitor m;
        m.name = std::move(name);
        m.axis = axis;
        m.index = node_index;
        m.lo = lo;
        m.hi = hi;
        m.sign = sign;
        if (hi <= lo) throw std::invalid_argument("line monitor '" + m.name + "' is empty");
        m.e_tan.assign(m.pixels(), {});
        m.h_tan.assign(m.pixels(), {});
        monitors_.push_back(std::move(m));
        return int(monitors_.size()) - 1;
    }

    /// Four-line box around a node, outward-positive.
    std::vector<int> add_source_box(int ci, int cj, int offset_cells) {
        const int d = offset_cells;
        return {add_line_monitor("box-u", 0, ci - d, cj - d, cj + d, -1.0),
                add_line_monitor("box+u", 0, ci + d, cj - d, cj + d, +1.0),
                add_line_monitor("box-v", 1, cj - d, ci - d, ci + d, -1.0),
                add_line_monitor("box+v", 1, cj + d, ci - d, ci + d, +1.0)};
    }

    const LineMonitor& monitor(int id) const { return monitors_[std::size_t(id)]; }

    /// Time-averaged Poynting flux through a line monitor, positive along
    /// sign * (+normal).
    double flux(int id) const {
        const LineMonitor& m = monitors_[std::size_t(id)];
        double p = 0.0;
        for (std::size_t q = 0; q < m.e_tan.size(); ++q) {
            p += (m.e_tan[q] * std::conj(m.h_tan[q])).real();
        }
        // Orientation of (E_tan, H_tan) pairs is chosen in the accumulators
        // so flux along +normal is +Re(E H*)/2.
        return 0.5 * m.sign * p * h_;
    }

    void step() {
        update_h();
        accumulate_monitors((step_ + 0.5) * dt_, false);
        update_e();
        inject((step_ + 0.5) * dt_);
        accumulate_monitors((step_ + 1.0) * dt_, true);
        ++step_;
    }

    Simulation3D::RunOutcome run(const Simulation3D::Termination& term,
                                 const std::function<void(const Simulation2D&)>& frame_hook = {},
                                 int frame_interval = 0) {
        Simulation3D::RunOutcome out;
        double peak = 0.0, prev_energy = -1.0;
        const double t_source_end = has_source_ ? pulse_.end_time() : 0.0;
        while (out.steps < term.max_steps) {
            step();
            ++out.steps;
            if (frame_hook && frame_interval > 0 && out.steps % frame_interval == 0)
                frame_hook(*this);
            if (out.steps % term.check_interval != 0) continue;
            const double energy = total_energy();
            if (!std::isfinite(energy)) throw StabilityError(step_);
            peak = std::max(peak, energy);
            const bool source_off = step_ * dt_ > t_source_end;
            if (source_off) {
                if (prev_energy > 0.0 && energy > 0.0)
                    out.max_post_source_rise =
                        std::max(out.max_post_source_rise, energy / prev_energy);
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
        return out;
    }

    double total_energy() const {
        double acc = 0.0;
        const double area = h_ * h_;
        for (int i = 0; i < nu_; ++i) {
            for (int j = 0; j < nv_; ++j) {
                const std::size_t q = idx(i, j);
                double e = 0.0, hmag = 0.0;
                if (pol_ == Polarization2D::OutOfPlaneE) {
                    if (ce_w_[q] > 0.0) e += (dt_ / ce_w_[q]) * fw_[q] * fw_[q];
                    hmag = fu_[q] * fu_[q] + fv_[q] * fv_[q];
                } else {
                    if (ce_u_[q] > 0.0) e += (dt_ / ce_u_[q]) * fu_[q] * fu_[q];
                    if (ce_v_[q] > 0.0) e += (dt_ / ce_v_[q]) * fv_[q] * fv_[q];
                    hmag = fw_[q] * fw_[q];
                }
                acc += 0.5 * (e + vacuum_permeability * hmag) * area;
            }
        }
        return acc;
    }

private:
    struct Injection {
        int component;  // 0 = u, 1 = v, 2 = w
        std::size_t index;
        double coefficient;
    };

    void build_coefficients(const SliceGrid& grid) {
        auto cell = [&](int i, int j) {
            i = std::clamp(i, 0, nu_ - 1);
            j = std::clamp(j, 0, nv_ - 1);
            return grid.eps[grid.index(i, j)];
        };
        for (int i = 0; i <= nu_; ++i) {
            for (int j = 0; j <= nv_; ++j) {
                const std::size_t q = idx(i, j);
                // Ew at integer node: 4-cell average (pairwise in u).
                const double eps_w = 0.25 * ((cell(i - 1, j - 1) + cell(i - 1, j)) +
                                             (cell(i, j - 1) + cell(i, j)));
                ce_w_[q] = dt_ / (vacuum_permittivity * eps_w);
                if (i < nu_) {
                    const double eps_u = 0.5 * (cell(i, j - 1) + cell(i, j));
                    ce_u_[q] = dt_ / (vacuum_permittivity * eps_u);
                }
                if (j < nv_) {
                    const double eps_v = 0.5 * (cell(i - 1, j) + cell(i, j));
                    ce_v_[q] = dt_ / (vacuum_permittivity * eps_v);
                }
            }
        }
    }

    void update_h() {
        const double inv_h = 1.0 / h_;
        if (pol_ == Polarization2D::OutOfPlaneE) {
            // Hu at (i, j+1/2), Hv at (i+1/2, j); psi on the derivative axis.
            for (int i = 0; i <= nu_; ++i) {
                for (int j = 0; j < nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double d = (fw_[q + 1] - fw_[q]) * inv_h;
                    const double bh = pml_v_.b_h[std::size_t(j)];
                    const double cc = pml_v_.c_h[std::size_t(j)];
                    const double ik = pml_v_.inv_kappa_h[std::size_t(j)];
                    psi_fu_v_[q] = bh * psi_fu_v_[q] + cc * d;
                    fu_[q] -= ch_ * (ik * d + psi_fu_v_[q]);
                }
            }
            for (int i = 0; i < nu_; ++i) {
                const double bh = pml_u_.b_h[std::size_t(i)];
                const double cc = pml_u_.c_h[std::size_t(i)];
                const double ik = pml_u_.inv_kappa_h[std::size_t(i)];
                for (int j = 0; j <= nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double d = (fw_[q + nj_] - fw_[q]) * inv_h;
                    psi_fv_u_[q] = bh * psi_fv_u_[q] + cc * d;
                    fv_[q] += ch_ * (ik * d + psi_fv_u_[q]);
                }
            }
        } else {
            // Hw at (i+1/2, j+1/2).
            for (int i = 0; i < nu_; ++i) {
                const double bhu = pml_u_.b_h[std::size_t(i)];
                const double ccu = pml_u_.c_h[std::size_t(i)];
                const double iku = pml_u_.inv_kappa_h[std::size_t(i)];
                for (int j = 0; j < nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double du = (fv_[q + nj_] - fv_[q]) * inv_h;
                    const double dv = (fu_[q + 1] - fu_[q]) * inv_h;
                    const double bhv = pml_v_.b_h[std::size_t(j)];
                    const double ccv = pml_v_.c_h[std::size_t(j)];
                    const double ikv = pml_v_.inv_kappa_h[std::size_t(j)];
                    psi_fw_u_[q] = bhu * psi_fw_u_[q] + ccu * du;
                    psi_fw_v_[q] = bhv * psi_fw_v_[q] + ccv * dv;
                    fw_[q] -= ch_ * ((iku * du + psi_fw_u_[q]) - (ikv * dv + psi_fw_v_[q]));
                }
            }
        }
    }

    void update_e() {
        const double inv_h = 1.0 / h_;
        if (pol_ == Polarization2D::OutOfPlaneE) {
            for (int i = 1; i < nu_; ++i) {
                const double beu = pml_u_.b_e[std::size_t(i)];
                const double ccu = pml_u_.c_e[std::size_t(i)];
                const double iku = pml_u_.inv_kappa_e[std::size_t(i)];
                for (int j = 1; j < nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double du = (fv_[q] - fv_[q - nj_]) * inv_h;
                    const double dv = (fu_[q] - fu_[q - 1]) * inv_h;
                    const double bev = pml_v_.b_e[std::size_t(j)];
                    const double ccv = pml_v_.c_e[std::size_t(j)];
                    const double ikv = pml_v_.inv_kappa_e[std::size_t(j)];
                    psi_fw_u_[q] = beu * psi_fw_u_[q] + ccu * du;
                    psi_fw_v_[q] = bev * psi_fw_v_[q] + ccv * dv;
                    fw_[q] += ce_w_[q] * ((iku * du + psi_fw_u_[q]) - (ikv * dv + psi_fw_v_[q]));
                }
            }
        } else {
            for (int i = 0; i < nu_; ++i) {
                for (int j = 1; j < nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double d = (fw_[q] - fw_[q - 1]) * inv_h;
                    const double be = pml_v_.b_e[std::size_t(j)];
                    const double cc = pml_v_.c_e[std::size_t(j)];
                    const double ik = pml_v_.inv_kappa_e[std::size_t(j)];
                    psi_fu_v_[q] = be * psi_fu_v_[q] + cc * d;
                    fu_[q] += ce_u_[q] * (ik * d + psi_fu_v_[q]);
                }
            }
            for (int i = 1; i < nu_; ++i) {
                const double be = pml_u_.b_e[std::size_t(i)];
                const double cc = pml_u_.c_e[std::size_t(i)];
                const double ik = pml_u_.inv_kappa_e[std::size_t(i)];
                for (int j = 0; j < nv_; ++j) {
                    const std::size_t q = idx(i, j);
                    const double d = (fw_[q] - fw_[q - nj_]) * inv_h;
                    psi_fv_u_[q] = be * psi_fv_u_[q] + cc * d;
                    fv_[q] -= ce_v_[q] * (ik * d + psi_fv_u_[q]);
                }
            }
        }
    }

    void inject(double t) {
        if (!has_source_) return;
        const double j_t = pulse_.value(t);
        for (const Injection& inj : injections_) {
            const double jd = inj.coefficient * j_t;
            switch (inj.component) {
                case 0: fu_[inj.index] -= ce_u_[inj.index] * jd; break;
                case 1: fv_[inj.index] -= ce_v_[inj.index] * jd; break;
                case 2: fw_[inj.index] -= ce_w_[inj.index] * jd; break;
            }
        }
    }

    void accumulate_monitors(double t, bool e_phase) {
        const double phase = -omega_ * t;
        const std::complex<double> w{std::cos(phase) * dt_, std::sin(phase) * dt_};
        for (LineMonitor& m : monitors_) {
            const int I = m.index;
            for (int p = m.lo; p < m.hi; ++p) {
                const std::size_t out = std::size_t(p - m.lo);
                if (pol_ == Polarization2D::OutOfPlaneE) {
                    if (m.axis == 0) {
                        // pixel (I, p+1/2): E_tan = Ew, H_tan pairs with -Hv
                        // so +Re(E H*)/2 is flux along +u.
                        const std::size_t q = idx(I, p);
                        if (e_phase) {
                            m.e_tan[out] += 0.5 * (fw_[q] + fw_[q + 1]) * w;
                        } else {
                            const double hv = 0.25 * ((fv_[q - nj_] + fv_[q - nj_ + 1]) +
                                                      (fv_[q] + fv_[q + 1]));
                            m.h_tan[out] += -hv * w;
                        }
                    } else {
                        // pixel (p+1/2, I): flux along +v pairs Ew with +Hu.
                        const std::size_t q = idx(p, I);
                        if (e_phase) {
                            m.e_tan[out] += 0.5 * (fw_[q] + fw_[q + nj_]) * w;
                        } else {
                            const double hu = 0.25 * ((fu_[q - 1] + fu_[q]) +
                                                      (fu_[q + nj_ - 1] + fu_[q + nj_]));
                            m.h_tan[out] += hu * w;
                        }
                    }
                } else {
                    if (m.axis == 0) {
                        // flux along +u pairs Ev with +Hw.
                        const std::size_t q = idx(I, p);
                        if (e_phase) {
                            m.e_tan[out] += fv_[q] * w;
                        } else {
                            m.h_tan[out] += 0.5 * (fw_[q - nj_] + fw_[q]) * w;
                        }
                    } else {
                        // flux along +v pairs Eu with -Hw.
                        const std::size_t q = idx(p, I);
                        if (e_phase) {
                            m.e_tan[out] += fu_[q] * w;
                        } else {
                            m.h_tan[out] += -0.5 * (fw_[q - 1] + fw_[q]) * w;
                        }
                    }
                }
            }
        }
    }

    int nu_, nv_;
    int nj_ = 0;
    double h_;
    double ou_, ov_;
    Polarization2D pol_;
    double omega_;
    double dt_ = 0.0, ch_ = 0.0;
    int step_ = 0;

    // fw is the out-of-plane scalar (Ew or Hw); fu/fv are the in-plane pair
    // (Hu/Hv or Eu/Ev, by polarization).
    std::vector<double> fw_, fu_, fv_;
    std::vector<double> ce_w_, ce_u_, ce_v_;
    std::vector<double> psi_fu_v_, psi_fv_u_, psi_fw_u_, psi_fw_v_;
    AxisPml pml_u_, pml_v_;

    GaussianPulse pulse_;
    bool has_source_ = false;
    std::vector<Injection> injections_;
    std::vector<LineMonitor> monitors_;
};

}  // namespace wgqd::fdtd
