#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "wgqd/config.hpp"
#include "wgqd/io.hpp"
#include "wgqd/manifest.hpp"

using namespace wgqd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("wgqd_test_" + std::to_string(std::uintptr_t(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Io, Fnv1a64KnownVectors) {
    EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(Io, BinaryStreamRoundTripIsExact) {
    TempDir dir;
    const TimestampStream s = add_background(TimestampStream("x", {}, 2.0), 5e4, 11);
    const fs::path path = dir.path / "s.bin";
    io::write_timestamps_binary(s, path);
    const TimestampStream back = io::read_timestamps_binary(path);
    EXPECT_EQ(back.times(), s.times());
    EXPECT_EQ(back.duration(), s.duration());
}

TEST(Io, CsvStreamRoundTripKeeps12Digits) {
    TempDir dir;
    const TimestampStream s = add_background(TimestampStream("x", {}, 1.0), 1e4, 13);
    const fs::path path = dir.path / "s.csv";
    io::write_timestamps_csv(s, path);
    const TimestampStream back = io::read_timestamps_csv(path, 1.0);
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR(back.times()[i], s.times()[i], 1e-11 * std::max(s.times()[i], 1e-3));
    }
}

TEST(Io, G2CurveRoundTripPreservesFit) {
    TempDir dir;
    Rng rng(3);
    G2Curve curve;
    for (int i = -40; i <= 40; ++i) {
        G2Point p;
        p.tau = i * 2e-9;
        const double mu = g2_two_level(p.tau, 0.8, 20e-9) * 500.0;
        p.counts = std::int64_t(rng.poisson(mu));
        p.norm = 500.0;
        p.g2 = double(p.counts) / p.norm;
        p.sigma = std::sqrt(double(p.counts)) / p.norm;
        curve.points.push_back(p);
    }
    const fs::path path = dir.path / "curve.csv";
    io::write_g2_curve_csv(curve, path);
    const G2Curve back = io::read_g2_curve_csv(path);
    ASSERT_EQ(back.size(), curve.size());
    const G2Fit f1 = fit_g2(curve);
    const G2Fit f2 = fit_g2(back);
    EXPECT_NEAR(f1.b, f2.b, 1e-6);
    EXPECT_NEAR(f1.tau_l, f2.tau_l, 1e-6 * f1.tau_l);
}

TEST(Config, GeometryRoundTrip) {
    DeviceGeometry g;
    g.hole_radius = 35e-9;
    g.emitter_position = {5e-9, -3e-9, 10e-9};
    g.dipole_orientation = {1.0, 0.0, 0.0};
    g.materials.waveguide.refractive_index = 2.05;
    const DeviceGeometry back = config::geometry_from_json(config::geometry_to_json(g));
    EXPECT_DOUBLE_EQ(back.hole_radius, g.hole_radius);
    EXPECT_DOUBLE_EQ(back.emitter_position.x, g.emitter_position.x);
    EXPECT_DOUBLE_EQ(back.dipole_orientation.x, 1.0);
    EXPECT_DOUBLE_EQ(back.materials.waveguide.refractive_index, 2.05);
    EXPECT_DOUBLE_EQ(back.domain_extent.z, g.domain_extent.z);
}

TEST(Config, RunConfigRoundTrip) {
    fdtd::RunConfig c;
    c.cell_size = 12.5e-9;
    c.pml.thickness = 12;
    c.monitors.waveguide_distance = 1.4e-6;
    c.monitors.waveguide_margin_below = 80e-9;
    c.termination.max_steps = 1234;
    const fdtd::RunConfig back = config::run_config_from_json(config::run_config_to_json(c));
    EXPECT_DOUBLE_EQ(back.cell_size, c.cell_size);
    EXPECT_EQ(back.pml.thickness, 12);
    EXPECT_DOUBLE_EQ(back.monitors.waveguide_distance, 1.4e-6);
    EXPECT_DOUBLE_EQ(back.monitors.waveguide_margin_below, 80e-9);
    EXPECT_EQ(back.termination.max_steps, 1234);
}

TEST(Config, ScenarioParsingAndPreset) {
    const auto j = nlohmann::json::parse(R"({
        "preset": "paper_fig3",
        "duration_s": 0.25,
        "background_rate_hz": 1500,
        "emitter": {"blinking": {"model": "exponential", "on_to_off_rate_hz": 3.0,
                                 "off_to_on_rate_hz": 7.0}}
    })");
    const config::G2Scenario s = config::g2_scenario_from_json(j);
    EXPECT_NEAR(s.emitter.decay_rate, 1.0 / 23.9e-9, 1.0);
    EXPECT_NEAR(s.emitter.pump_rate, s.emitter.decay_rate / 50.0, 1.0);
    EXPECT_EQ(s.duration, 0.25);
    EXPECT_EQ(s.background_rate, 1500.0);
    EXPECT_EQ(s.emitter.blinking.model, BlinkingParams::Model::Exponential);
    EXPECT_EQ(s.emitter.blinking.on_to_off_rate, 3.0);
    // The preset chain excludes the -3 dB split stage (hbt_split performs it).
    EXPECT_NEAR(chain_total_db(s.loss_chain), 13.1, 1e-12);

    EXPECT_THROW(config::g2_scenario_from_json(
                     nlohmann::json::parse(R"({"emitter":{"blinking":{"model":"bogus"}}})")),
                 std::runtime_error);
}

TEST(Config, BudgetAndPlacementParsing) {
    const auto bj = nlohmann::json::parse(R"({
        "loss_chain": [{"name": "a", "db": 3.0}, {"db": 13.1}],
        "detected_rate_hz": 5521, "detected_sigma_hz": 98
    })");
    const config::BudgetConfig b = config::budget_from_json(bj);
    EXPECT_NEAR(chain_total_db(b.chain), 16.1, 1e-12);
    EXPECT_EQ(b.detected_rate, 5521.0);

    const auto pj = nlohmann::json::parse(R"({
        "fill_probability": 0.55, "neutralize_multi": true, "iterations": 7, "trials": 50
    })");
    const config::PlacementConfig p = config::placement_from_json(pj);
    EXPECT_NEAR(p.params.lambda, 0.7985, 1e-4);
    EXPECT_TRUE(p.params.neutralize_multi);
    EXPECT_EQ(p.iterations, 7);
}

TEST(Manifest, RecordsOutputsAndDigests) {
    TempDir dir;
    io::write_text(dir.path / "data.csv", "a,b\n1,2\n");
    RunManifest manifest("test cmd", 0x1234, 42);
    manifest.add_output(dir.path / "data.csv");
    manifest.write(dir.path);
    const auto j = config::load_json((dir.path / "manifest.json").string());
    EXPECT_EQ(j.at("tool"), "wgqd");
    EXPECT_EQ(j.at("master_seed"), 42);
    EXPECT_EQ(j.at("outputs").size(), 1u);
    EXPECT_EQ(j.at("outputs")[0].at("path"), "data.csv");
    EXPECT_EQ(j.at("outputs")[0].at("fnv1a64"),
              io::hex64(io::fnv1a64("a,b\n1,2\n")));
}
