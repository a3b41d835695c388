#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgqd/config.hpp"
#include "wgqd/fdtd/run.hpp"
#include "wgqd/io.hpp"

namespace wgqd {

enum class SweptParameter { HoleRadius, HoleDepth, EmitterPosition };

inline const char* to_string(SweptParameter p) {
    switch (p) {
        case SweptParameter::HoleRadius: return "hole_radius";
        case SweptParameter::HoleDepth: return "hole_depth";
        case SweptParameter::EmitterPosition: return "emitter_position";
    }
    return "?";
}

struct SweepSpec {
    SweptParameter parameter = SweptParameter::HoleRadius;
    std::vector<double> values;       // radius or depth values, m (strictly increasing)
    std::vector<double> x_positions;  // position sweep axes, m, relative to hole center
    std::vector<double> y_positions;
    std::vector<Vec3> orientations{{0.0, 1.0, 0.0}};
    DeviceGeometry base_geometry;
    fdtd::RunConfig run;
    std::string cache_dir;  // per-row result cache; empty disables

    void validate() const {
        const GeometryReport report = validate_geometry(base_geometry);
        if (!report.ok()) throw std::invalid_argument(report.to_string());
        auto strictly_increasing = [](const std::vector<double>& v) {
            for (std::size_t i = 1; i < v.size(); ++i)
                if (!(v[i] > v[i - 1])) return false;
            return true;
        };
        if (parameter == SweptParameter::EmitterPosition) {
            if (!strictly_increasing(x_positions) || !strictly_increasing(y_positions))
                throw std::invalid_argument("position axes must be strictly increasing");
        } else if (!strictly_increasing(values)) {
            throw std::invalid_argument("sweep values must be strictly increasing");
        }
        if (orientations.empty()) throw std::invalid_argument("need at least one orientation");
    }
};

struct SweepRow {
    double value = 0.0;       // radius or depth (m); x for position sweeps
    double value2 = 0.0;      // y for position sweeps
    Vec3 orientation;
    std::string status = "ok";  // "ok" or the error text; results valid when ok
    double eta_wg = 0.0;
    double eta_na = 0.0;
    double p_left = 0.0, p_right = 0.0, p_total = 0.0;
    double single_sided = 0.0;  // P_right / P_total
    double monitor_sum_fraction = 0.0;
    double max_post_source_rise = 0.0;
    double wall_seconds = 0.0;  // 0 when served from cache
};

struct SweepResult {
    SweptParameter parameter = SweptParameter::HoleRadius;
    std::vector<SweepRow> rows;
};

namespace detail {

inline std::string orientation_label(const Vec3& o) {
    if (o.x == 1.0 && o.y == 0.0 && o.z == 0.0) return "x";
    if (o.x == 0.0 && o.y == 1.0 && o.z == 0.0) return "y";
    if (o.x == 0.0 && o.y == 0.0 && o.z == 1.0) return "z";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.3f,%.3f,%.3f)", o.x, o.y, o.z);
    return buf;
}

/// Cache key: hash of the full row configuration (geometry + resolution +
/// monitor layout + source); rows shared between sweeps reuse each other's
/// results.
inline std::uint64_t row_cache_key(const DeviceGeometry& g, const fdtd::RunConfig& run) {
    nlohmann::json j;
    j["geometry"] = config::geometry_to_json(g);
    fdtd::RunConfig canonical = run;
    canonical.threads = 0;  // execution detail, not part of the result identity
    j["run"] = config::run_config_to_json(canonical);
    return io::fnv1a64(j.dump());
}

inline SweepRow run_row(const DeviceGeometry& g, const fdtd::RunConfig& run,
                        const std::string& cache_dir) {
    SweepRow row;
    row.orientation = g.dipole_orientation;
    std::filesystem::path cache_file;
    if (!cache_dir.empty()) {
        cache_file = std::filesystem::path(cache_dir) /
                     (io::hex64(row_cache_key(g, run)) + ".json");
        if (std::filesystem::exists(cache_file)) {
            const nlohmann::json j = config::load_json(cache_file.string());
            row.eta_wg = j.at("eta_wg").get<double>();
            row.eta_na = j.at("eta_na").get<double>();
            row.p_left = j.at("p_left").get<double>();
            row.p_right = j.at("p_right").get<double>();
            row.p_total = j.at("p_total").get<double>();
            row.single_sided = j.at("single_sided").get<double>();
            row.monitor_sum_fraction = j.at("monitor_sum_fraction").get<double>();
            row.max_post_source_rise = j.value("max_post_source_rise", 0.0);
            row.status = j.at("status").get<std::string>();
            return row;
        }
    }
    const auto start = std::chrono::steady_clock::now();
    try {
        const fdtd::CouplingResult r = fdtd::run_simulation(g, run);
        row.eta_wg = r.eta_wg;
        row.eta_na = r.eta_na;
        row.p_left = r.p_left;
        row.p_right = r.p_right;
        row.p_total = r.p_total;
        row.single_sided = r.p_total > 0.0 ? r.p_right / r.p_total : 0.0;
        row.monitor_sum_fraction = r.monitor_sum_fraction;
        row.max_post_source_rise = r.max_post_source_rise;
        if (!r.converged) row.status = "non-convergence: step budget exhausted";
    } catch (const std::exception& e) {
        row.status = e.what();
    }
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!cache_file.empty() && row.status == "ok") {
        nlohmann::json j{{"eta_wg", row.eta_wg},
                         {"eta_na", row.eta_na},
                         {"p_left", row.p_left},
                         {"p_right", row.p_right},
                         {"p_total", row.p_total},
                         {"single_sided", row.single_sided},
                         {"monitor_sum_fraction", row.monitor_sum_fraction},
                         {"max_post_source_rise", row.max_post_source_rise},
                         {"status", row.status}};
        // Write-then-rename keeps concurrent readers away from torn files.
        const std::filesystem::path tmp = cache_file.string() + ".tmp";
        io::write_text(tmp, j.dump(2) + "\n");
        std::filesystem::rename(tmp, cache_file);
    }
    return row;
}

}  // namespace detail

/// Coupling efficiency vs hole radius at fixed depth.
inline SweepResult sweep_radius(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.parameter = SweptParameter::HoleRadius;
    for (const Vec3& orientation : spec.orientations) {
        for (double radius : spec.values) {
            DeviceGeometry g = spec.base_geometry;
            g.hole_radius = radius;
            g.dipole_orientation = orientation;
            SweepRow row = detail::run_row(g, spec.run, spec.cache_dir);
            row.value = radius;
            result.rows.push_back(row);
        }
    }
    return result;
}

/// Coupling efficiency vs hole depth at fixed radius.
inline SweepResult sweep_depth(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.parameter = SweptParameter::HoleDepth;
    for (const Vec3& orientation : spec.orientations) {
        for (double depth : spec.values) {
            DeviceGeometry g = spec.base_geometry;
            g.hole_depth = depth;
            g.dipole_orientation = orientation;
            SweepRow row = detail::run_row(g, spec.run, spec.cache_dir);
            row.value = depth;
            result.rows.push_back(row);
        }
    }
    return result;
}

/// One-directional (right monitor) coupling efficiency over an emitter
/// position grid inside the hole footprint. Positions outside the footprint
/// are rejected per-row, not fatally.
inline SweepResult sweep_position(const SweepSpec& spec) {
    spec.validate();
    SweepResult result;
    result.parameter = SweptParameter::EmitterPosition;
    for (const Vec3& orientation : spec.orientations) {
        for (double x : spec.x_positions) {
            for (double y : spec.y_positions) {
                DeviceGeometry g = spec.base_geometry;
                g.emitter_position.x = x;
                g.emitter_position.y = y;
                g.dipole_orientation = orientation;
                SweepRow row;
                if (!emitter_within_hole(g)) {
                    row.orientation = orientation;
                    row.status = "position outside the hole footprint";
                } else {
                    row = detail::run_row(g, spec.run, spec.cache_dir);
                }
                row.value = x;
                row.value2 = y;
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

/// CSV columns: value[,value2],orientation,status,eta_wg,eta_na,p_left,
/// p_right,p_total,single_sided,monitor_sum_fraction. Lengths in nm.
inline void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    io::ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const bool positional = result.parameter == SweptParameter::EmitterPosition;
    out << (positional ? "x_nm,y_nm" : std::string(to_string(result.parameter)) + "_nm")
        << ",orientation,status,eta_wg,eta_na,p_left,p_right,p_total,single_sided,"
           "monitor_sum_fraction\n";
    for (const SweepRow& row : result.rows) {
        out << io::format_seconds(row.value * 1e9);
        if (positional) out << "," << io::format_seconds(row.value2 * 1e9);
        out << "," << detail::orientation_label(row.orientation) << "," << row.status << ","
            << io::format_seconds(row.eta_wg) << "," << io::format_seconds(row.eta_na) << ","
            << io::format_seconds(row.p_left) << "," << io::format_seconds(row.p_right) << ","
            << io::format_seconds(row.p_total) << "," << io::format_seconds(row.single_sided)
            << "," << io::format_seconds(row.monitor_sum_fraction) << "\n";
    }
}

}  // namespace wgqd
