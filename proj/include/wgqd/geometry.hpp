#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgqd {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Nondispersive material described by its refractive index at the
/// simulation wavelength.
struct Material {
    std::string name;
    double refractive_index = 1.0;

    double permittivity() const { return refractive_index * refractive_index; }
};

struct DeviceMaterials {
    Material substrate{"SiO2", 1.45};
    Material waveguide{"Ta2O5", 2.12};
    Material cladding{"air", 1.0};
    Material cqd_core{"CdSeTe", 2.6};
    Material cqd_shell{"ZnS", 2.4};
};

/// Waveguide crossing with a cylindrical hole hosting the emitter.
///
/// Coordinates: the collection waveguide runs along x, the excitation
/// waveguide along y, both centered on the origin. z = 0 is the waveguide
/// bottom (substrate top); the guide occupies 0 <= z <= waveguide_height.
/// The hole is carved from the guide top down to depth `hole_depth`.
/// `emitter_position` is relative to the hole-bottom center, so the default
/// (0,0,0) puts the dipole at the bottom of the hole.
///
/// The simulation box spans [-Lx/2, Lx/2] x [-Ly/2, Ly/2] in plane and
/// [-substrate_thickness, Lz - substrate_thickness] in z.
struct DeviceGeometry {
    double waveguide_width = 700e-9;   // m
    double waveguide_height = 100e-9;  // m
    double hole_radius = 25e-9;        // m
    double hole_depth = 100e-9;        // m
    Vec3 emitter_position{0.0, 0.0, 0.0};
    Vec3 dipole_orientation{0.0, 1.0, 0.0};
    double cqd_core_radius = 3e-9;   // m
    double cqd_shell_radius = 5e-9;  // m
    DeviceMaterials materials;
    double emission_wavelength = 705e-9;           // m
    // Longer along the collection guide so the waveguide flux planes sit far
    // enough out that co-propagating radiation has diverged away from them.
    Vec3 domain_extent{5.2e-6, 4e-6, 2.5e-6};      // m
    double substrate_thickness = 0.9e-6;           // m, part of domain_extent.z

    double hole_bottom_z() const { return waveguide_height - hole_depth; }

    /// Emitter position in absolute device coordinates.
    Vec3 emitter_absolute() const {
        return {emitter_position.x, emitter_position.y, hole_bottom_z() + emitter_position.z};
    }

    double domain_z_min() const { return -substrate_thickness; }
    double domain_z_max() const { return domain_extent.z - substrate_thickness; }
};

struct GeometryReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const {
        if (ok()) return "geometry valid";
        std::string out = "geometry invalid:";
        for (const auto& v : violations) out += "\n  - " + v;
        return out;
    }
};

inline GeometryReport validate_geometry(const DeviceGeometry& g) {
    GeometryReport report;
    auto require = [&](bool cond, const std::string& msg) {
        if (!cond) report.violations.push_back(msg);
    };

    for (const Material* m : {&g.materials.substrate, &g.materials.waveguide,
                              &g.materials.cladding, &g.materials.cqd_core,
                              &g.materials.cqd_shell}) {
        require(m->refractive_index >= 1.0 && std::isfinite(m->refractive_index),
                "material '" + m->name + "' must have refractive_index >= 1");
    }
    require(g.waveguide_width > 0.0, "waveguide_width must be > 0");
    require(g.waveguide_height > 0.0, "waveguide_height must be > 0");
    require(g.hole_radius >= 0.0, "hole_radius must be >= 0");
    require(g.hole_depth >= 0.0 && g.hole_depth <= g.waveguide_height,
            "hole_depth must lie within [0, waveguide_height]");
    require(g.cqd_core_radius > 0.0, "cqd_core_radius must be > 0");
    require(g.cqd_shell_radius >= g.cqd_core_radius,
            "cqd_shell_radius must be >= cqd_core_radius");
    require(g.emission_wavelength > 0.0, "emission_wavelength must be > 0");
    require(g.domain_extent.x > 0.0 && g.domain_extent.y > 0.0 && g.domain_extent.z > 0.0,
            "domain_extent components must be > 0");
    require(g.substrate_thickness > 0.0 && g.substrate_thickness < g.domain_extent.z,
            "substrate_thickness must lie within (0, domain_extent.z)");

    const double norm = std::sqrt(g.dipole_orientation.x * g.dipole_orientation.x +
                                  g.dipole_orientation.y * g.dipole_orientation.y +
                                  g.dipole_orientation.z * g.dipole_orientation.z);
    require(std::abs(norm - 1.0) < 1e-9, "dipole_orientation must be a unit vector");

    const Vec3 e = g.emitter_absolute();
    const double r = g.cqd_shell_radius;
    require(std::abs(e.x) + r <= g.domain_extent.x / 2 &&
                std::abs(e.y) + r <= g.domain_extent.y / 2 &&
                e.z - r >= g.domain_z_min() && e.z + r <= g.domain_z_max(),
            "emitter sphere must fit inside the simulation domain");
    return report;
}

/// True when the emitter's lateral position lies inside the hole footprint.
inline bool emitter_within_hole(const DeviceGeometry& g) {
    const double d2 = g.emitter_position.x * g.emitter_position.x +
                      g.emitter_position.y * g.emitter_position.y;
    return d2 <= g.hole_radius * g.hole_radius;
}

/// Point-wise material lookup. The CQD core/shell spheres displace air only
/// (hole interior or space above the guide), never solid material, so a
/// zero-radius hole leaves the plain crossing untouched.
class GeometrySampler {
public:
    explicit GeometrySampler(const DeviceGeometry& g)
        : eps_clad_(g.materials.cladding.permittivity()),
          eps_sub_(g.materials.substrate.permittivity()),
          eps_wg_(g.materials.waveguide.permittivity()),
          eps_core_(g.materials.cqd_core.permittivity()),
          eps_shell_(g.materials.cqd_shell.permittivity()),
          half_w_(g.waveguide_width / 2),
          guide_top_(g.waveguide_height),
          hole_r2_(g.hole_radius * g.hole_radius),
          hole_zmin_(g.hole_bottom_z()),
          has_hole_(g.hole_radius > 0.0 && g.hole_depth > 0.0),
          core_r2_(g.cqd_core_radius * g.cqd_core_radius),
          shell_r2_(g.cqd_shell_radius * g.cqd_shell_radius) {
        const Vec3 e = g.emitter_absolute();
        ex_ = e.x;
        ey_ = e.y;
        ez_ = e.z;
    }

    double eps_at(double x, double y, double z) const {
        double base;
        bool in_air;
        if (z < 0.0) {
            base = eps_sub_;
            in_air = false;
        } else if (z <= guide_top_ && (std::abs(y) <= half_w_ || std::abs(x) <= half_w_)) {
            if (has_hole_ && z >= hole_zmin_ && x * x + y * y <= hole_r2_) {
                base = eps_clad_;
                in_air = true;
            } else {
                base = eps_wg_;
                in_air = false;
            }
        } else {
            base = eps_clad_;
            in_air = true;
        }
        if (in_air) {
            const double dx = x - ex_, dy = y - ey_, dz = z - ez_;
            const double d2 = dx * dx + dy * dy + dz * dz;
            if (d2 <= core_r2_) return eps_core_;
            if (d2 <= shell_r2_) return eps_shell_;
        }
        return base;
    }

private:
    double eps_clad_, eps_sub_, eps_wg_, eps_core_, eps_shell_;
    double half_w_, guide_top_;
    double hole_r2_, hole_zmin_;
    bool has_hole_;
    double core_r2_, shell_r2_;
    double ex_ = 0, ey_ = 0, ez_ = 0;
};

/// Cell-centered relative permittivity on a uniform grid. Cell (i,j,k) is
/// centered at origin + (i+1/2, j+1/2, k+1/2) * cell_size; index order is
/// (i*ny + j)*nz + k with k fastest.
struct PermittivityGrid {
    double cell_size = 0.0;
    int nx = 0, ny = 0, nz = 0;
    Vec3 origin;  // min corner
    std::vector<double> eps;

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * ny + j) * nz + k;
    }
    double at(int i, int j, int k) const { return eps[index(i, j, k)]; }
    double& at(int i, int j, int k) { return eps[index(i, j, k)]; }

    double x_center(int i) const { return origin.x + (i + 0.5) * cell_size; }
    double y_center(int j) const { return origin.y + (j + 0.5) * cell_size; }
    double z_center(int k) const { return origin.z + (k + 0.5) * cell_size; }

    std::size_t cell_count() const {
        return std::size_t(nx) * std::size_t(ny) * std::size_t(nz);
    }
};

namespace detail {
inline int snapped_cells(double extent, double cell_size) {
    return std::max(1, int(std::ceil(extent / cell_size - 1e-9)));
}
}  // namespace detail

/// Rasterizes the device into a permittivity grid. Each cell holds the
/// average permittivity over a 4x4x4 sub-sample of the cell volume. Cell
/// counts snap upward so the grid covers at least the requested extent; the
/// lateral origin stays centered on the crossing and z_min stays anchored at
/// -substrate_thickness.
inline PermittivityGrid build_permittivity_grid(const DeviceGeometry& g, double cell_size,
                                                std::size_t max_cells = 200'000'000) {
    const GeometryReport report = validate_geometry(g);
    if (!report.ok()) throw std::invalid_argument(report.to_string());
    if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be > 0");
    if (cell_size > g.waveguide_height / 2 + 1e-15) {
        throw std::invalid_argument("cell_size must resolve the waveguide height with >= 2 cells");
    }

    PermittivityGrid grid;
    grid.cell_size = cell_size;
    grid.nx = detail::snapped_cells(g.domain_extent.x, cell_size);
    grid.ny = detail::snapped_cells(g.domain_extent.y, cell_size);
    grid.nz = detail::snapped_cells(g.domain_extent.z, cell_size);
    if (grid.cell_count() > max_cells) {
        throw std::invalid_argument("cell budget exceeded: " + std::to_string(grid.cell_count()) +
                                    " > " + std::to_string(max_cells));
    }
    grid.origin = {-0.5 * grid.nx * cell_size, -0.5 * grid.ny * cell_size, g.domain_z_min()};
    grid.eps.assign(grid.cell_count(), 1.0);

    const GeometrySampler sampler(g);
    // Sub-sample offsets (2s+1-S)/(2S) for S=4: exact dyadic fractions, so a
    // mirrored cell sees the exact mirrored sample set.
    constexpr int kSub = 4;
    double offs[kSub];
    for (int s = 0; s < kSub; ++s) offs[s] = double(2 * s + 1 - kSub) / double(2 * kSub);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < grid.nx; ++i) {
        const double xc = (i + 0.5 - 0.5 * grid.nx) * cell_size;
        for (int j = 0; j < grid.ny; ++j) {
            const double yc = (j + 0.5 - 0.5 * grid.ny) * cell_size;
            for (int k = 0; k < grid.nz; ++k) {
                const double zc = grid.origin.z + (k + 0.5) * cell_size;
                // x offsets are paired symmetrically so an x-mirrored cell
                // accumulates bit-identical partial sums.
                double acc = 0.0;
                for (int b = 0; b < kSub; ++b)
                    for (int c = 0; c < kSub; ++c)
                        for (int a = 0; a < kSub / 2; ++a) {
                            const double y = yc + offs[b] * cell_size;
                            const double z = zc + offs[c] * cell_size;
                            acc += sampler.eps_at(xc + offs[a] * cell_size, y, z) +
                                   sampler.eps_at(xc + offs[kSub - 1 - a] * cell_size, y, z);
                        }
                grid.eps[grid.index(i, j, k)] = acc / double(kSub * kSub * kSub);
            }
        }
    }
    return grid;
}

}  // namespace wgqd
