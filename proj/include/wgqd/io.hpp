#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wgqd/correlation.hpp"
#include "wgqd/emitter.hpp"
#include "wgqd/placement.hpp"

namespace wgqd::io {

/// FNV-1a 64-bit; used for config hashes and output digests in manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    return fnv1a64(s);
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// 12-significant-digit decimal, the stream CSV convention.
inline std::string format_seconds(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", t);
    return buf;
}

inline void ensure_parent(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

// --- timestamp streams ----------------------------------------------------

/// CSV: header line "time_s", one event time per row, 12 significant digits.
inline void write_timestamps_csv(const TimestampStream& s, const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time_s\n";
    for (double t : s.times()) out << format_seconds(t) << "\n";
}

inline TimestampStream read_timestamps_csv(const std::filesystem::path& path, double duration,
                                           const std::string& channel = "csv") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::vector<double> times;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("time") != std::string::npos) continue;
        }
        times.push_back(std::stod(line));
    }
    return {channel, std::move(times), duration};
}

/// Binary framing: ASCII magic "WGTS", u32 version, u64 count, f64 duration,
/// then count little-endian f64 seconds.
inline void write_timestamps_binary(const TimestampStream& s,
                                    const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("WGTS", 4);
    const std::uint32_t version = 1;
    out.write(reinterpret_cast<const char*>(&version), 4);
    const std::uint64_t count = s.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    const double duration = s.duration();
    out.write(reinterpret_cast<const char*>(&duration), 8);
    out.write(reinterpret_cast<const char*>(s.times().data()),
              std::streamsize(count * sizeof(double)));
}

inline TimestampStream read_timestamps_binary(const std::filesystem::path& path,
                                              const std::string& channel = "bin") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::string_view(magic, 4) != "WGTS")
        throw std::runtime_error(path.string() + " is not a timestamp stream file");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw std::runtime_error("unsupported stream file version");
    std::uint64_t count = 0;
    double duration = 0.0;
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&duration), 8);
    std::vector<double> times(count);
    in.read(reinterpret_cast<char*>(times.data()), std::streamsize(count * sizeof(double)));
    if (!in) throw std::runtime_error("truncated stream file " + path.string());
    return {channel, std::move(times), duration};
}

// --- curves ----------------------------------------------------------------

/// CSV columns: tau_s, g2, sigma.
inline void write_g2_curve_csv(const G2Curve& curve, const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "tau_s,g2,sigma\n";
    for (const auto& p : curve.points) {
        out << format_seconds(p.tau) << "," << format_seconds(p.g2) << ","
            << format_seconds(p.sigma) << "\n";
    }
}

inline G2Curve read_g2_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    G2Curve curve;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.find("tau") != std::string::npos) continue;
        }
        G2Point p;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        p.tau = std::stod(tok);
        std::getline(ss, tok, ',');
        p.g2 = std::stod(tok);
        std::getline(ss, tok, ',');
        p.sigma = std::stod(tok);
        // Reconstruct fit weights: sigma = sqrt(counts)/norm and g2 =
        // counts/norm determine both up to zero-count bins.
        if (p.sigma > 0.0) {
            p.norm = p.g2 > 0.0 ? p.g2 / (p.sigma * p.sigma) : 1.0 / (p.sigma * p.sigma);
            p.counts = std::int64_t(std::llround(p.g2 * p.norm));
        } else {
            p.norm = 1.0;
            p.counts = 0;
        }
        curve.points.push_back(p);
    }
    return curve;
}

/// CSV columns: bin_start_s, counts.
inline void write_intensity_csv(const std::vector<std::uint64_t>& counts, double bin_width,
                                const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "bin_start_s,counts\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out << format_seconds(double(i) * bin_width) << "," << counts[i] << "\n";
    }
}

/// CSV columns: iteration, occupied_mean, occupied_ci, single_mean, single_ci.
inline void write_yield_csv(const YieldCurves& curves, const std::filesystem::path& path) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "iteration,occupied_mean,occupied_ci,single_mean,single_ci\n";
    for (const auto& p : curves.points) {
        out << p.iteration << "," << format_seconds(p.occupied_mean) << ","
            << format_seconds(p.occupied_ci) << "," << format_seconds(p.single_mean) << ","
            << format_seconds(p.single_ci) << "\n";
    }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace wgqd::io
