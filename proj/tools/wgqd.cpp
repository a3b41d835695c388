// wgqd: command-line front end for the waveguide-integrated quantum dot
// source simulation toolkit. Subcommands cover FDTD coupling runs and
// sweeps, photon statistics simulation and fitting, placement-yield
// analysis, and loss budget inference. All seeded commands are
// reproducible: the same config and seed give bit-identical output files;
// manifest.json records provenance and digests.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wgqd/config.hpp"
#include "wgqd/io.hpp"
#include "wgqd/manifest.hpp"
#include "wgqd/sweeps.hpp"
#include "wgqd/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wgqd;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "wgqd-out";
    std::uint64_t seed = 1;
    int threads = 0;
    bool paper_mode = false;
};

json load_config_or_empty(const std::string& path) {
    if (path.empty()) return json::object();
    return config::load_json(path);
}

std::uint64_t config_hash(const json& j) { return io::fnv1a64(j.dump()); }

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_seed = true) {
    cmd->add_option("--config", opts.config_path, "JSON config file")->envname("WGQD_CONFIG");
    cmd->add_option("--out", opts.out_dir, "output directory")->envname("WGQD_OUT");
    if (with_seed) cmd->add_option("--seed", opts.seed, "master seed")->envname("WGQD_SEED");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = library default)")
        ->envname("WGQD_THREADS");
    cmd->add_flag("--paper-mode", opts.paper_mode,
                  "full-fidelity defaults instead of desk scale")
        ->envname("WGQD_PAPER_MODE");
}

void write_monitor_maps(const fdtd::CouplingResult& result, const fs::path& dir,
                        RunManifest& manifest) {
    for (const auto& map : result.field_maps) {
        const fs::path path = dir / ("monitor_" + map.name + ".csv");
        std::ofstream out(path);
        // Columns: x, y, z, value. value = time-averaged normal Poynting
        // flux density in W/m^2.
        out << "x,y,z,value\n";
        for (std::size_t a = 0; a < map.a_coords.size(); ++a) {
            for (std::size_t b = 0; b < map.b_coords.size(); ++b) {
                double xyz[3];
                xyz[map.axis] = map.plane_coord;
                xyz[(map.axis + 1) % 3] = map.a_coords[a];
                xyz[(map.axis + 2) % 3] = map.b_coords[b];
                out << io::format_seconds(xyz[0]) << "," << io::format_seconds(xyz[1]) << ","
                    << io::format_seconds(xyz[2]) << ","
                    << io::format_seconds(map.values[a * map.b_coords.size() + b]) << "\n";
            }
        }
        out.close();
        manifest.add_output(path);
    }
}

int cmd_fdtd_run(const CommonOpts& opts) {
    const json j = load_config_or_empty(opts.config_path);
    DeviceGeometry geometry =
        j.contains("geometry") ? config::geometry_from_json(j.at("geometry")) : DeviceGeometry{};
    fdtd::RunConfig run = config::run_config_from_json(j);
    if (opts.paper_mode && !j.contains("resolution_nm")) run.cell_size = 10e-9;
    if (opts.threads > 0) run.threads = opts.threads;

    RunManifest manifest("fdtd run", config_hash(j), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const fdtd::CouplingResult result = fdtd::run_simulation(geometry, run);
    const fs::path coupling_path = dir / "coupling.json";
    io::write_text(coupling_path, config::coupling_result_to_json(result).dump(2) + "\n");
    manifest.add_output(coupling_path);
    write_monitor_maps(result, dir, manifest);
    manifest.write(dir);

    std::cout << config::coupling_result_to_json(result).dump(2) << std::endl;
    return result.converged ? 0 : 3;
}

int cmd_fdtd_run2d(const CommonOpts& opts, const std::string& plane_name, int frame_interval) {
    const json j = load_config_or_empty(opts.config_path);
    DeviceGeometry geometry =
        j.contains("geometry") ? config::geometry_from_json(j.at("geometry")) : DeviceGeometry{};
    const fdtd::RunConfig run3d = config::run_config_from_json(j);
    fdtd::Run2DConfig run;
    run.cell_size = run3d.cell_size;
    run.courant = run3d.courant;
    run.pml = run3d.pml;
    run.source = run3d.source;
    run.monitors = run3d.monitors;
    run.termination = run3d.termination;
    run.frame_interval = frame_interval;
    if (opts.paper_mode && !j.contains("resolution_nm")) run.cell_size = 10e-9;

    const fdtd::SlicePlane plane =
        plane_name == "xz" ? fdtd::SlicePlane::XZ : fdtd::SlicePlane::XY;

    RunManifest manifest("fdtd run2d " + plane_name, config_hash(j), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const fdtd::Result2D result = fdtd::run_simulation_2d(geometry, plane, run);
    json out{{"plane", plane_name},
             {"p_u_minus", result.p_u_minus},
             {"p_u_plus", result.p_u_plus},
             {"p_v_minus", result.p_v_minus},
             {"p_v_plus", result.p_v_plus},
             {"p_total", result.p_total},
             {"waveguide_fraction", result.waveguide_fraction},
             {"steps_run", result.steps_run},
             {"converged", result.converged},
             {"warnings", result.warnings}};
    const fs::path flux_path = dir / "flux2d.json";
    io::write_text(flux_path, out.dump(2) + "\n");
    manifest.add_output(flux_path);

    // Frame CSV columns: x, y (XY slice) or x, z (XZ slice), value =
    // out-of-plane field at the cell center.
    for (const auto& frame : result.frames) {
        char name[64];
        std::snprintf(name, sizeof(name), "frame_%06d.csv", frame.step);
        const fs::path path = dir / name;
        std::ofstream f(path);
        f << (plane == fdtd::SlicePlane::XY ? "x,y,value\n" : "x,z,value\n");
        for (int i = 0; i < result.nu; ++i) {
            for (int v = 0; v < result.nv; ++v) {
                f << io::format_seconds(result.origin_u + (i + 0.5) * result.cell_size) << ","
                  << io::format_seconds(result.origin_v + (v + 0.5) * result.cell_size) << ","
                  << io::format_seconds(frame.values[std::size_t(i) * result.nv + v]) << "\n";
            }
        }
        f.close();
        manifest.add_output(path);
    }
    manifest.write(dir);
    std::cout << out.dump(2) << std::endl;
    return result.converged ? 0 : 3;
}

int cmd_fdtd_sweep(const CommonOpts& opts, const std::string& figure) {
    const json j = load_config_or_empty(opts.config_path);
    SweepSpec spec;
    spec.base_geometry =
        j.contains("geometry") ? config::geometry_from_json(j.at("geometry")) : DeviceGeometry{};
    spec.run = config::run_config_from_json(j);
    if (opts.paper_mode && !j.contains("resolution_nm")) spec.run.cell_size = 10e-9;
    if (opts.threads > 0) spec.run.threads = opts.threads;
    spec.cache_dir = (fs::path(opts.out_dir) / ".cache").string();

    auto linspace = [](double lo, double hi, int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / double(n - 1));
        return v;
    };
    auto values_from_config = [&]() {
        std::vector<double> v;
        for (const auto& x : j.at("values_nm")) v.push_back(x.get<double>() * 1e-9);
        return v;
    };
    const std::vector<Vec3> xyz{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    SweepResult result;
    if (figure == "1b") {
        spec.parameter = SweptParameter::HoleRadius;
        spec.values = j.contains("values_nm") ? values_from_config()
                                              : linspace(0.0, 75e-9, opts.paper_mode ? 16 : 7);
        spec.orientations = xyz;
        result = sweep_radius(spec);
    } else if (figure == "1c") {
        spec.parameter = SweptParameter::HoleDepth;
        spec.values = j.contains("values_nm") ? values_from_config()
                                              : linspace(0.0, 100e-9, opts.paper_mode ? 11 : 6);
        spec.orientations = xyz;
        result = sweep_depth(spec);
    } else {
        spec.parameter = SweptParameter::EmitterPosition;
        const int n = opts.paper_mode ? 7 : 5;
        const double reach = 20e-9;  // inside the 25 nm hole footprint
        spec.x_positions = linspace(-reach, reach, n);
        spec.y_positions = linspace(-reach, reach, n);
        spec.orientations = {{0, 1, 0}};
        result = sweep_position(spec);
    }

    RunManifest manifest("fdtd sweep " + figure, config_hash(j), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    const fs::path csv_path = dir / ("sweep_" + figure + ".csv");
    write_sweep_csv(result, csv_path);
    manifest.add_output(csv_path);

    // Echo the resolved sweep definition for provenance.
    json echo{{"figure", figure},
              {"parameter", to_string(result.parameter)},
              {"resolution_nm", spec.run.cell_size * 1e9},
              {"geometry", config::geometry_to_json(spec.base_geometry)},
              {"rows", result.rows.size()}};
    const fs::path echo_path = dir / "sweep_manifest.json";
    io::write_text(echo_path, echo.dump(2) + "\n");
    manifest.add_output(echo_path);
    manifest.write(dir);

    int failed = 0;
    for (const auto& row : result.rows)
        if (row.status != "ok") ++failed;
    std::cout << "sweep " << figure << ": " << result.rows.size() - std::size_t(failed) << "/"
              << result.rows.size() << " rows ok -> " << csv_path.string() << std::endl;
    return failed == 0 ? 0 : 3;
}

int cmd_g2_simulate(const CommonOpts& opts) {
    const json j = load_config_or_empty(opts.config_path);
    const config::G2Scenario scenario =
        j.empty() ? config::paper_fig3_scenario() : config::g2_scenario_from_json(j);

    RunManifest manifest("g2 simulate", config_hash(j), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const TimestampStream emitted =
        simulate_emission(scenario.emitter, scenario.duration, opts.seed);
    const double emitted_rate = emitted.mean_rate();
    const TimestampStream in_guide = scenario.loss_chain.empty()
                                         ? emitted
                                         : apply_loss(emitted, scenario.loss_chain, opts.seed);
    const TimestampStream with_bg =
        scenario.background_rate > 0.0
            ? add_background(in_guide, scenario.background_rate, opts.seed)
            : in_guide;
    auto [ch1, ch2] = hbt_split(with_bg, opts.seed);
    ch1 = detect(ch1, scenario.detector, opts.seed);
    ch2 = detect(ch2, scenario.detector, opts.seed + 1);

    io::write_timestamps_binary(ch1, dir / "ch1.bin");
    io::write_timestamps_binary(ch2, dir / "ch2.bin");
    io::write_timestamps_csv(ch1, dir / "ch1.csv");
    io::write_timestamps_csv(ch2, dir / "ch2.csv");
    const double trace_bin = 0.01;
    io::write_intensity_csv(intensity_trace(with_bg, trace_bin), trace_bin,
                            dir / "intensity.csv");

    json summary{{"emitted_photons", emitted.size()},
                 {"emitted_rate_hz", emitted_rate},
                 {"detected_ch1", ch1.size()},
                 {"detected_ch2", ch2.size()},
                 {"detected_rate_hz",
                  (double(ch1.size()) + double(ch2.size())) / ch1.duration()},
                 {"background_rate_hz", scenario.background_rate},
                 {"loss_total_db", chain_total_db(scenario.loss_chain)},
                 {"duration_s", scenario.duration},
                 {"seed", opts.seed}};
    io::write_text(dir / "summary.json", summary.dump(2) + "\n");

    for (const char* name :
         {"ch1.bin", "ch2.bin", "ch1.csv", "ch2.csv", "intensity.csv", "summary.json"})
        manifest.add_output(dir / name);
    manifest.write(dir);
    std::cout << summary.dump(2) << std::endl;
    return 0;
}

int cmd_g2_correlate(const CommonOpts& opts, const std::string& ch1_path,
                     const std::string& ch2_path, double window, double bin_width) {
    auto read_stream = [](const std::string& path) {
        if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
            throw std::runtime_error(
                "correlate needs the .bin stream files (CSV carries no duration)");
        }
        return io::read_timestamps_binary(path);
    };
    const TimestampStream s1 = read_stream(ch1_path);
    const TimestampStream s2 = read_stream(ch2_path);

    const json cfg{{"ch1", ch1_path},
                   {"ch2", ch2_path},
                   {"window_s", window},
                   {"bin_width_s", bin_width}};
    RunManifest manifest("g2 correlate", config_hash(cfg), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const G2Histogram hist = correlate(s1, s2, window, bin_width);
    const G2Curve curve = normalize(hist);
    io::write_g2_curve_csv(curve, dir / "g2_curve.csv");
    const json meta{{"rate1_hz", hist.rate1},
                    {"rate2_hz", hist.rate2},
                    {"duration_s", hist.duration},
                    {"bin_width_s", hist.bin_width},
                    {"bins", hist.counts.size()},
                    {"total_coincidences", hist.total_counts()}};
    io::write_text(dir / "correlate.json", meta.dump(2) + "\n");
    manifest.add_output(dir / "g2_curve.csv");
    manifest.add_output(dir / "correlate.json");
    manifest.write(dir);
    std::cout << meta.dump(2) << std::endl;
    return 0;
}

int cmd_g2_fit(const CommonOpts& opts, const std::string& curve_path) {
    const G2Curve curve = io::read_g2_curve_csv(curve_path);
    const json cfg{{"curve", curve_path}};
    RunManifest manifest("g2 fit", config_hash(cfg), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const G2Fit fit = fit_g2(curve);
    io::write_text(dir / "fit.json", config::fit_to_json(fit).dump(2) + "\n");
    manifest.add_output(dir / "fit.json");
    manifest.write(dir);
    std::cout << config::fit_to_json(fit).dump(2) << std::endl;
    return fit.converged ? 0 : 3;
}

int cmd_g2_correct(const CommonOpts& opts, const std::string& curve_path,
                   const std::string& fit_path, double rho, double signal_rate,
                   double background_rate) {
    if (rho <= 0.0) rho = estimate_rho(signal_rate, background_rate);
    const json cfg{{"curve", curve_path}, {"fit", fit_path}, {"rho", rho}};
    RunManifest manifest("g2 correct", config_hash(cfg), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);
    json out{{"rho", rho}};

    if (!curve_path.empty()) {
        const G2Curve corrected = background_correct(io::read_g2_curve_csv(curve_path), rho);
        io::write_g2_curve_csv(corrected, dir / "g2_corrected.csv");
        manifest.add_output(dir / "g2_corrected.csv");
    }
    if (!fit_path.empty()) {
        const json fj = config::load_json(fit_path);
        G2Fit fit;
        fit.b = fj.at("b").get<double>();
        fit.tau_l = fj.at("tau_l_s").get<double>();
        fit.g2_zero_raw = fj.at("g2_zero_raw").get<double>();
        const G2Fit corrected = background_correct(fit, rho);
        out["g2_zero_raw"] = corrected.g2_zero_raw;
        out["g2_zero_corrected"] = corrected.g2_zero_corrected;
    }
    io::write_text(dir / "correct.json", out.dump(2) + "\n");
    manifest.add_output(dir / "correct.json");
    manifest.write(dir);
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int cmd_placement_simulate(const CommonOpts& opts) {
    const json j = load_config_or_empty(opts.config_path);
    const config::PlacementConfig cfg =
        j.empty() ? config::PlacementConfig{} : config::placement_from_json(j);

    RunManifest manifest("placement simulate", config_hash(j), opts.seed);
    const fs::path dir(opts.out_dir);
    fs::create_directories(dir);

    const YieldCurves curves = simulate_protocol(cfg.params, cfg.rows * cfg.cols,
                                                 cfg.iterations, cfg.trials, opts.seed);
    io::write_yield_csv(curves, dir / "yield.csv");
    manifest.add_output(dir / "yield.csv");

    // One fully logged trajectory as a debugging state dump.
    SiteArray state(cfg.rows, cfg.cols);
    for (int it = 0; it < cfg.iterations; ++it) {
        state = run_iteration(state, cfg.params,
                              opts.seed ^ (0x9e3779b97f4a7c15ull + std::uint64_t(it)));
    }
    json dump = json::array();
    for (const auto& rec : state.log()) {
        dump.push_back({{"exposed_sites", rec.exposed_sites},
                        {"newly_filled", rec.newly_filled},
                        {"emitters_per_site", rec.emitters_per_site}});
    }
    const OccupancyStats stats = occupancy_stats(state);
    const json out{{"lambda", cfg.params.lambda},
                   {"fill_probability", fill_probability(cfg.params.lambda)},
                   {"trials", cfg.trials},
                   {"iterations", cfg.iterations},
                   {"final_occupied_mean", curves.points.back().occupied_mean},
                   {"final_single_mean", curves.points.back().single_mean},
                   {"example_trajectory",
                    {{"occupied_fraction", stats.occupied_fraction},
                     {"single_of_all", stats.single_of_all},
                     {"log", dump}}}};
    io::write_text(dir / "placement.json", out.dump(2) + "\n");
    manifest.add_output(dir / "placement.json");
    manifest.write(dir);
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int cmd_placement_analytic(double p, double target, double fill) {
    json out;
    if (fill >= 0.0) {
        const LambdaEstimate est = estimate_lambda_from_fill(fill);
        out["fill_probability"] = fill;
        out["lambda"] = est.lambda;
        out["single_of_occupied"] = est.single_of_occupied;
    }
    if (p > 0.0) {
        const int k = expected_iterations(p, target);
        out["p"] = p;
        out["target"] = target;
        out["iterations"] = k;
        out["cumulative_yield"] = cumulative_yield(p, k);
    }
    std::cout << out.dump(2) << std::endl;
    return 0;
}

int cmd_budget_infer(const CommonOpts& opts, double rate_override, double sigma_override) {
    const json j = load_config_or_empty(opts.config_path);
    config::BudgetConfig cfg;
    if (!j.empty()) cfg = config::budget_from_json(j);
    if (rate_override >= 0.0) cfg.detected_rate = rate_override;
    if (sigma_override >= 0.0) cfg.detected_sigma = sigma_override;

    const double total_db = chain_total_db(cfg.chain);
    const RateEstimate est = infer_source_rate(cfg.detected_rate, cfg.chain, cfg.detected_sigma);

    std::printf("%-28s %10s %14s\n", "stage", "loss (dB)", "transmission");
    for (const auto& s : cfg.chain.stages()) {
        std::printf("%-28s %10.2f %14.5f\n", s.name.c_str(), s.attenuation_db,
                    db_to_linear(s.attenuation_db));
    }
    std::printf("%-28s %10.2f %14.5f\n", "total", total_db, db_to_linear(total_db));
    std::printf("detected rate: %.6g +/- %.3g counts/s\n", cfg.detected_rate, cfg.detected_sigma);
    std::printf("inferred source rate: %.6g +/- %.3g photons/s\n", est.rate, est.sigma);

    const json out{{"total_db", total_db},
                   {"transmission", db_to_linear(total_db)},
                   {"detected_rate_hz", cfg.detected_rate},
                   {"detected_sigma_hz", cfg.detected_sigma},
                   {"source_rate_hz", est.rate},
                   {"source_sigma_hz", est.sigma}};
    if (!opts.out_dir.empty()) {
        RunManifest manifest("budget infer", config_hash(j), 0);
        const fs::path dir(opts.out_dir);
        fs::create_directories(dir);
        io::write_text(dir / "budget.json", out.dump(2) + "\n");
        manifest.add_output(dir / "budget.json");
        manifest.write(dir);
    }
    std::cout << out.dump(2) << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"waveguide-integrated quantum dot source simulation toolkit"};
    app.set_version_flag("--version", std::string("wgqd ") + version_string);
    app.require_subcommand(1);

    auto* fdtd_cmd = app.add_subcommand("fdtd", "electromagnetic coupling simulations");
    fdtd_cmd->require_subcommand(1);
    CommonOpts fdtd_run_opts;
    auto* fdtd_run = fdtd_cmd->add_subcommand("run", "single 3-D coupling run");
    add_common(fdtd_run, fdtd_run_opts);

    CommonOpts fdtd_run2d_opts;
    std::string plane = "xy";
    int frame_interval = 0;
    auto* fdtd_run2d =
        fdtd_cmd->add_subcommand("run2d", "2-D cross-section run with field frames");
    add_common(fdtd_run2d, fdtd_run2d_opts);
    fdtd_run2d->add_option("--plane", plane, "slice plane: xy or xz")
        ->check(CLI::IsMember({"xy", "xz"}));
    fdtd_run2d->add_option("--frame-interval", frame_interval,
                           "steps between field frames (0 = none)");

    CommonOpts sweep_opts;
    std::string figure;
    auto* fdtd_sweep = fdtd_cmd->add_subcommand("sweep", "parameter sweeps");
    add_common(fdtd_sweep, sweep_opts);
    fdtd_sweep
        ->add_option("--figure", figure, "which sweep: 1b (radius), 1c (depth), 1d (position)")
        ->required()
        ->check(CLI::IsMember({"1b", "1c", "1d"}));

    auto* g2_cmd = app.add_subcommand("g2", "photon statistics pipeline");
    g2_cmd->require_subcommand(1);
    CommonOpts g2_sim_opts;
    auto* g2_sim = g2_cmd->add_subcommand("simulate", "emitter + HBT timestamp streams");
    add_common(g2_sim, g2_sim_opts);

    CommonOpts g2_corr_opts;
    std::string ch1_path, ch2_path;
    double window = 150e-9, bin_width = 2e-9;
    auto* g2_corr = g2_cmd->add_subcommand("correlate", "coincidence histogram and g2 curve");
    add_common(g2_corr, g2_corr_opts);
    g2_corr->add_option("--ch1", ch1_path, "channel-1 stream (.bin)")->required();
    g2_corr->add_option("--ch2", ch2_path, "channel-2 stream (.bin)")->required();
    g2_corr->add_option("--window", window, "correlation window, s");
    g2_corr->add_option("--bin", bin_width, "bin width, s");

    CommonOpts g2_fit_opts;
    std::string curve_path;
    auto* g2_fit_cmd = g2_cmd->add_subcommand("fit", "two-level model fit of a g2 curve");
    add_common(g2_fit_cmd, g2_fit_opts);
    g2_fit_cmd->add_option("--curve", curve_path, "g2 curve CSV")->required();

    CommonOpts g2_correct_opts;
    std::string correct_curve, correct_fit;
    double rho = 0.0, signal_rate = 0.0, background_rate = 0.0;
    auto* g2_correct = g2_cmd->add_subcommand("correct", "background correction");
    add_common(g2_correct, g2_correct_opts);
    g2_correct->add_option("--curve", correct_curve, "g2 curve CSV to correct");
    g2_correct->add_option("--fit", correct_fit, "fit.json to correct");
    g2_correct->add_option("--rho", rho, "signal purity S/(S+B)");
    g2_correct->add_option("--signal-rate", signal_rate, "signal rate for rho estimation");
    g2_correct->add_option("--background-rate", background_rate,
                           "background rate for rho estimation");

    auto* placement_cmd = app.add_subcommand("placement", "iterative placement yield");
    placement_cmd->require_subcommand(1);
    CommonOpts placement_opts;
    auto* placement_sim = placement_cmd->add_subcommand("simulate", "Monte Carlo yield curves");
    add_common(placement_sim, placement_opts);

    double p_fill = 0.0, target = 0.99, fill_obs = -1.0;
    auto* placement_an = placement_cmd->add_subcommand("analytic", "closed-form yield analysis");
    placement_an->add_option("--p", p_fill, "per-iteration fill probability");
    placement_an->add_option("--target", target, "target site-occupation fraction");
    placement_an->add_option("--fill", fill_obs, "observed fill fraction -> Poisson lambda");

    auto* budget_cmd = app.add_subcommand("budget", "dB loss-chain arithmetic");
    budget_cmd->require_subcommand(1);
    CommonOpts budget_opts;
    double rate_override = -1.0, sigma_override = -1.0;
    auto* budget_infer = budget_cmd->add_subcommand("infer", "source rate from detected rate");
    add_common(budget_infer, budget_opts, false);
    budget_infer->add_option("--rate", rate_override, "detected rate, counts/s");
    budget_infer->add_option("--sigma", sigma_override, "detected rate uncertainty, counts/s");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fdtd_run->parsed()) return cmd_fdtd_run(fdtd_run_opts);
        if (fdtd_run2d->parsed()) return cmd_fdtd_run2d(fdtd_run2d_opts, plane, frame_interval);
        if (fdtd_sweep->parsed()) return cmd_fdtd_sweep(sweep_opts, figure);
        if (g2_sim->parsed()) return cmd_g2_simulate(g2_sim_opts);
        if (g2_corr->parsed())
            return cmd_g2_correlate(g2_corr_opts, ch1_path, ch2_path, window, bin_width);
        if (g2_fit_cmd->parsed()) return cmd_g2_fit(g2_fit_opts, curve_path);
        if (g2_correct->parsed())
            return cmd_g2_correct(g2_correct_opts, correct_curve, correct_fit, rho, signal_rate,
                                  background_rate);
        if (placement_sim->parsed()) return cmd_placement_simulate(placement_opts);
        if (placement_an->parsed()) return cmd_placement_analytic(p_fill, target, fill_obs);
        if (budget_infer->parsed())
            return cmd_budget_infer(budget_opts, rate_override, sigma_override);
    } catch (const std::exception& e) {
        const json err{{"error", e.what()}};
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}
