#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "wgqd/io.hpp"
#include "wgqd/version.hpp"

namespace wgqd {

/// Provenance record written next to every command's outputs. Output files
/// themselves carry no timestamps, so reruns with the same seed and config
/// are bit-identical; the manifest records when and from what they were made.
class RunManifest {
public:
    RunManifest(std::string command, std::uint64_t config_hash, std::uint64_t master_seed)
        : command_(std::move(command)), config_hash_(config_hash), master_seed_(master_seed),
          started_at_(now_iso8601()) {}

    void add_output(const std::filesystem::path& path) {
        Output o;
        o.path = path.filename().string();
        o.bytes = std::filesystem::file_size(path);
        o.digest = io::fnv1a64_file(path);
        outputs_.push_back(std::move(o));
    }

    void write(const std::filesystem::path& out_dir) const {
        nlohmann::json j;
        j["tool"] = "wgqd";
        j["version"] = version_string;
        j["command"] = command_;
        j["config_fnv1a64"] = io::hex64(config_hash_);
        j["master_seed"] = master_seed_;
        j["started_at"] = started_at_;
        j["finished_at"] = now_iso8601();
        nlohmann::json outs = nlohmann::json::array();
        for (const auto& o : outputs_) {
            outs.push_back({{"path", o.path}, {"bytes", o.bytes}, {"fnv1a64", io::hex64(o.digest)}});
        }
        j["outputs"] = outs;
        io::write_text(out_dir / "manifest.json", j.dump(2) + "\n");
    }

private:
    struct Output {
        std::string path;
        std::uintmax_t bytes = 0;
        std::uint64_t digest = 0;
    };

    static std::string now_iso8601() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::tm tm_utc{};
        gmtime_r(&t, &tm_utc);
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        return buf;
    }

    std::string command_;
    std::uint64_t config_hash_;
    std::uint64_t master_seed_;
    std::string started_at_;
    std::vector<Output> outputs_;
};

}  // namespace wgqd
