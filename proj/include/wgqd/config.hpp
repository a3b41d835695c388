#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "wgqd/budget.hpp"
#include "wgqd/correlation.hpp"
#include "wgqd/emitter.hpp"
#include "wgqd/fdtd/run.hpp"
#include "wgqd/fdtd/run2d.hpp"
#include "wgqd/geometry.hpp"
#include "wgqd/placement.hpp"

namespace wgqd::config {

using nlohmann::json;

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j;
    in >> j;
    return j;
}

// All geometry lengths are nanometers in config documents; the library works
// in meters internally.
inline constexpr double nm = 1e-9;

inline Material material_from_json(const json& j, const Material& fallback) {
    Material m = fallback;
    if (j.contains("name")) m.name = j.at("name").get<std::string>();
    if (j.contains("index")) m.refractive_index = j.at("index").get<double>();
    return m;
}

inline json material_to_json(const Material& m) {
    return {{"name", m.name}, {"index", m.refractive_index}};
}

inline Vec3 vec3_from_json(const json& j, double scale) {
    if (!j.is_array() || j.size() != 3) throw std::runtime_error("expected a 3-element array");
    return {j[0].get<double>() * scale, j[1].get<double>() * scale, j[2].get<double>() * scale};
}

inline DeviceGeometry geometry_from_json(const json& j) {
    DeviceGeometry g;
    auto nm_field = [&](const char* key, double& target) {
        if (j.contains(key)) target = j.at(key).get<double>() * nm;
    };
    nm_field("waveguide_width_nm", g.waveguide_width);
    nm_field("waveguide_height_nm", g.waveguide_height);
    nm_field("hole_radius_nm", g.hole_radius);
    nm_field("hole_depth_nm", g.hole_depth);
    nm_field("cqd_core_radius_nm", g.cqd_core_radius);
    nm_field("cqd_shell_radius_nm", g.cqd_shell_radius);
    nm_field("emission_wavelength_nm", g.emission_wavelength);
    nm_field("substrate_thickness_nm", g.substrate_thickness);
    if (j.contains("emitter_position_nm"))
        g.emitter_position = vec3_from_json(j.at("emitter_position_nm"), nm);
    if (j.contains("dipole_orientation"))
        g.dipole_orientation = vec3_from_json(j.at("dipole_orientation"), 1.0);
    if (j.contains("domain_extent_nm"))
        g.domain_extent = vec3_from_json(j.at("domain_extent_nm"), nm);
    if (j.contains("materials")) {
        const json& m = j.at("materials");
        if (m.contains("substrate"))
            g.materials.substrate = material_from_json(m.at("substrate"), g.materials.substrate);
        if (m.contains("waveguide"))
            g.materials.waveguide = material_from_json(m.at("waveguide"), g.materials.waveguide);
        if (m.contains("cladding"))
            g.materials.cladding = material_from_json(m.at("cladding"), g.materials.cladding);
        if (m.contains("cqd_core"))
            g.materials.cqd_core = material_from_json(m.at("cqd_core"), g.materials.cqd_core);
        if (m.contains("cqd_shell"))
            g.materials.cqd_shell = material_from_json(m.at("cqd_shell"), g.materials.cqd_shell);
    }
    return g;
}

inline json geometry_to_json(const DeviceGeometry& g) {
    return {{"waveguide_width_nm", g.waveguide_width / nm},
            {"waveguide_height_nm", g.waveguide_height / nm},
            {"hole_radius_nm", g.hole_radius / nm},
            {"hole_depth_nm", g.hole_depth / nm},
            {"cqd_core_radius_nm", g.cqd_core_radius / nm},
            {"cqd_shell_radius_nm", g.cqd_shell_radius / nm},
            {"emission_wavelength_nm", g.emission_wavelength / nm},
            {"substrate_thickness_nm", g.substrate_thickness / nm},
            {"emitter_position_nm",
             {g.emitter_position.x / nm, g.emitter_position.y / nm, g.emitter_position.z / nm}},
            {"dipole_orientation",
             {g.dipole_orientation.x, g.dipole_orientation.y, g.dipole_orientation.z}},
            {"domain_extent_nm",
             {g.domain_extent.x / nm, g.domain_extent.y / nm, g.domain_extent.z / nm}},
            {"materials",
             {{"substrate", material_to_json(g.materials.substrate)},
              {"waveguide", material_to_json(g.materials.waveguide)},
              {"cladding", material_to_json(g.materials.cladding)},
              {"cqd_core", material_to_json(g.materials.cqd_core)},
              {"cqd_shell", material_to_json(g.materials.cqd_shell)}}}};
}

inline fdtd::RunConfig run_config_from_json(const json& j) {
    fdtd::RunConfig c;
    if (j.contains("resolution_nm")) c.cell_size = j.at("resolution_nm").get<double>() * nm;
    if (j.contains("courant")) c.courant = j.at("courant").get<double>();
    if (j.contains("pml")) {
        const json& p = j.at("pml");
        if (p.contains("cells")) c.pml.thickness = p.at("cells").get<int>();
        if (p.contains("order")) c.pml.grading_order = p.at("order").get<double>();
        if (p.contains("kappa_max")) c.pml.kappa_max = p.at("kappa_max").get<double>();
        if (p.contains("alpha_max")) c.pml.alpha_max = p.at("alpha_max").get<double>();
        if (p.contains("reflection")) c.pml.target_reflection = p.at("reflection").get<double>();
    }
    if (j.contains("source")) {
        const json& s = j.at("source");
        if (s.contains("amplitude")) c.source.amplitude = s.at("amplitude").get<double>();
        if (s.contains("fractional_bandwidth"))
            c.source.fractional_bandwidth = s.at("fractional_bandwidth").get<double>();
    }
    if (j.contains("monitors")) {
        const json& m = j.at("monitors");
        auto nm_field = [&](const char* key, double& target) {
            if (m.contains(key)) target = m.at(key).get<double>() * nm;
        };
        nm_field("waveguide_distance_nm", c.monitors.waveguide_distance);
        nm_field("waveguide_margin_nm", c.monitors.waveguide_margin);
        nm_field("waveguide_margin_below_nm", c.monitors.waveguide_margin_below);
        nm_field("top_standoff_nm", c.monitors.top_standoff);
        nm_field("bottom_depth_nm", c.monitors.bottom_depth);
        nm_field("top_bottom_half_width_nm", c.monitors.top_bottom_half_width);
        if (m.contains("numerical_aperture"))
            c.monitors.numerical_aperture = m.at("numerical_aperture").get<double>();
        if (m.contains("source_box_offset_cells"))
            c.monitors.source_box_offset_cells = m.at("source_box_offset_cells").get<int>();
    }
    if (j.contains("termination")) {
        const json& t = j.at("termination");
        if (t.contains("max_steps")) c.termination.max_steps = t.at("max_steps").get<int>();
        if (t.contains("decay_threshold"))
            c.termination.decay_threshold = t.at("decay_threshold").get<double>();
    }
    if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    if (j.contains("export_monitor_fields"))
        c.export_monitor_fields = j.at("export_monitor_fields").get<bool>();
    return c;
}

inline json run_config_to_json(const fdtd::RunConfig& c) {
    return {{"resolution_nm", c.cell_size / nm},
            {"courant", c.courant},
            {"pml",
             {{"cells", c.pml.thickness},
              {"order", c.pml.grading_order},
              {"kappa_max", c.pml.kappa_max},
              {"alpha_max", c.pml.alpha_max},
              {"reflection", c.pml.target_reflection}}},
            {"source",
             {{"amplitude", c.source.amplitude},
              {"fractional_bandwidth", c.source.fractional_bandwidth}}},
            {"monitors",
             {{"waveguide_distance_nm", c.monitors.waveguide_distance / nm},
              {"waveguide_margin_nm", c.monitors.waveguide_margin / nm},
              {"waveguide_margin_below_nm", c.monitors.waveguide_margin_below / nm},
              {"top_standoff_nm", c.monitors.top_standoff / nm},
              {"bottom_depth_nm", c.monitors.bottom_depth / nm},
              {"top_bottom_half_width_nm", c.monitors.top_bottom_half_width / nm},
              {"numerical_aperture", c.monitors.numerical_aperture},
              {"source_box_offset_cells", c.monitors.source_box_offset_cells}}},
            {"termination",
             {{"max_steps", c.termination.max_steps},
              {"decay_threshold", c.termination.decay_threshold}}},
            {"threads", c.threads},
            {"export_monitor_fields", c.export_monitor_fields}};
}

inline json coupling_result_to_json(const fdtd::CouplingResult& r) {
    return {{"p_left", r.p_left},
            {"p_right", r.p_right},
            {"p_top", r.p_top},
            {"p_bottom", r.p_bottom},
            {"p_total", r.p_total},
            {"eta_wg", r.eta_wg},
            {"eta_na", r.eta_na},
            {"monitor_sum_fraction", r.monitor_sum_fraction},
            {"steps_run", r.steps_run},
            {"converged", r.converged},
            {"max_post_source_rise", r.max_post_source_rise},
            {"warnings", r.warnings}};
}

// --- photon statistics scenario ---------------------------------------------

struct G2Scenario {
    EmitterParams emitter;
    DetectorParams detector;
    LossChain loss_chain;
    double duration = 1.0;
    double background_rate = 0.0;
    double window = 150e-9;
    double bin_width = 2e-9;
    double rho = 1.0;  // signal purity used by `g2 correct`
};

/// Scenario matching the measured device: decay 1/23.9 ns, pump far below
/// saturation, the measured loss chain. The -3 dB single-channel stage of
/// the measured budget is NOT part of this chain: hbt_split performs that
/// split physically, so including it here would count it twice.
inline G2Scenario paper_fig3_scenario() {
    G2Scenario s;
    s.emitter.decay_rate = 1.0 / 23.9e-9;
    s.emitter.pump_rate = s.emitter.decay_rate / 50.0;
    s.emitter.quantum_efficiency = 1.0;
    s.duration = 1.5;
    s.loss_chain = LossChain{{{"fiber-to-chip interface", 5.5},
                              {"spectral filters", 6.1},
                              {"detection efficiency", 1.5}}};
    return s;
}

inline G2Scenario g2_scenario_from_json(const json& j) {
    G2Scenario s;
    if (j.contains("preset") && j.at("preset").get<std::string>() == "paper_fig3")
        s = paper_fig3_scenario();
    if (j.contains("emitter")) {
        const json& e = j.at("emitter");
        if (e.contains("pump_rate_hz")) s.emitter.pump_rate = e.at("pump_rate_hz").get<double>();
        if (e.contains("decay_rate_hz"))
            s.emitter.decay_rate = e.at("decay_rate_hz").get<double>();
        if (e.contains("lifetime_ns") && !e.contains("decay_rate_hz"))
            s.emitter.decay_rate = 1.0 / (e.at("lifetime_ns").get<double>() * 1e-9);
        if (e.contains("quantum_efficiency"))
            s.emitter.quantum_efficiency = e.at("quantum_efficiency").get<double>();
        if (e.contains("initially_on")) s.emitter.initially_on = e.at("initially_on").get<bool>();
        if (e.contains("blinking")) {
            const json& b = e.at("blinking");
            const std::string model = b.value("model", "none");
            if (model == "none") {
                s.emitter.blinking.model = BlinkingParams::Model::None;
            } else if (model == "exponential") {
                s.emitter.blinking.model = BlinkingParams::Model::Exponential;
            } else if (model == "truncated_power_law") {
                s.emitter.blinking.model = BlinkingParams::Model::TruncatedPowerLaw;
            } else {
                throw std::runtime_error("unknown blinking model '" + model + "'");
            }
            if (b.contains("on_to_off_rate_hz"))
                s.emitter.blinking.on_to_off_rate = b.at("on_to_off_rate_hz").get<double>();
            if (b.contains("off_to_on_rate_hz"))
                s.emitter.blinking.off_to_on_rate = b.at("off_to_on_rate_hz").get<double>();
            if (b.contains("alpha")) s.emitter.blinking.alpha = b.at("alpha").get<double>();
            if (b.contains("t_min_s")) s.emitter.blinking.t_min = b.at("t_min_s").get<double>();
            if (b.contains("t_max_s")) s.emitter.blinking.t_max = b.at("t_max_s").get<double>();
        }
    }
    if (j.contains("detector")) {
        const json& d = j.at("detector");
        if (d.contains("efficiency")) s.detector.efficiency = d.at("efficiency").get<double>();
        if (d.contains("dead_time_s")) s.detector.dead_time = d.at("dead_time_s").get<double>();
        if (d.contains("jitter_sigma_s"))
            s.detector.jitter_sigma = d.at("jitter_sigma_s").get<double>();
        if (d.contains("dark_count_rate_hz"))
            s.detector.dark_count_rate = d.at("dark_count_rate_hz").get<double>();
    }
    if (j.contains("loss_chain")) {
        LossChain chain;
        for (const json& stage : j.at("loss_chain")) {
            chain.add_stage(stage.value("name", "stage"), stage.at("db").get<double>());
        }
        s.loss_chain = chain;
    }
    if (j.contains("duration_s")) s.duration = j.at("duration_s").get<double>();
    if (j.contains("background_rate_hz"))
        s.background_rate = j.at("background_rate_hz").get<double>();
    if (j.contains("window_s")) s.window = j.at("window_s").get<double>();
    if (j.contains("bin_width_s")) s.bin_width = j.at("bin_width_s").get<double>();
    if (j.contains("rho")) s.rho = j.at("rho").get<double>();
    return s;
}

// --- placement ----------------------------------------------------------

struct PlacementConfig {
    ProtocolParams params;
    int rows = 5, cols = 5;
    int iterations = 6;
    int trials = 1000;
};

inline PlacementConfig placement_from_json(const json& j) {
    PlacementConfig c;
    if (j.contains("lambda")) c.params.lambda = j.at("lambda").get<double>();
    if (j.contains("fill_probability") && !j.contains("lambda"))
        c.params.lambda = estimate_lambda_from_fill(j.at("fill_probability").get<double>()).lambda;
    if (j.contains("lambda_schedule"))
        for (const auto& l : j.at("lambda_schedule"))
            c.params.lambda_schedule.push_back(l.get<double>());
    if (j.contains("neutralize_multi"))
        c.params.neutralize_multi = j.at("neutralize_multi").get<bool>();
    if (j.contains("destroy_existing_prob"))
        c.params.destroy_existing_prob = j.at("destroy_existing_prob").get<double>();
    if (j.contains("rows")) c.rows = j.at("rows").get<int>();
    if (j.contains("cols")) c.cols = j.at("cols").get<int>();
    if (j.contains("iterations")) c.iterations = j.at("iterations").get<int>();
    if (j.contains("trials")) c.trials = j.at("trials").get<int>();
    return c;
}

// --- budget ---------------------------------------------------------------

struct BudgetConfig {
    LossChain chain;
    double detected_rate = 0.0;
    double detected_sigma = 0.0;
};

inline BudgetConfig budget_from_json(const json& j) {
    BudgetConfig c;
    LossChain chain;
    for (const json& stage : j.at("loss_chain")) {
        chain.add_stage(stage.value("name", "stage"), stage.at("db").get<double>());
    }
    c.chain = chain;
    if (j.contains("detected_rate_hz")) c.detected_rate = j.at("detected_rate_hz").get<double>();
    if (j.contains("detected_sigma_hz"))
        c.detected_sigma = j.at("detected_sigma_hz").get<double>();
    return c;
}

inline json fit_to_json(const G2Fit& fit) {
    return {{"b", fit.b},
            {"tau_l_s", fit.tau_l},
            {"b_sigma", fit.b_sigma},
            {"tau_l_sigma_s", fit.tau_l_sigma},
            {"rho", fit.rho},
            {"g2_zero_raw", fit.g2_zero_raw},
            {"g2_zero_corrected", fit.g2_zero_corrected},
            {"residual_norm", fit.residual_norm},
            {"iterations", fit.iterations},
            {"converged", fit.converged},
            {"warnings", fit.warnings}};
}

}  // namespace wgqd::config
