// SPDX-License-Identifier: Apache-2.0

#include "panoweave/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include "panoweave/png_io.hpp"

namespace panoweave::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Strict JSON overlay: every key is optional, unknown keys are errors.

class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
    }

    /// Rejects keys that no read() asked for.
    void done() const {
        for (const auto& [key, value] : node_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end()) return;
        const std::string where = path_ + "." + key;
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError(where + ": expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError(where + ": expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError(where + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (it->is_number_integer() && !it->is_number_unsigned()) throw ConfigError(where + ": expected a non-negative integer");
        } else {
            if (!it->is_number()) throw ConfigError(where + ": expected a number");
        }
        out = it->get<T>();
    }

    void read_optional_string(const char* key, std::optional<std::string>& out) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end()) return;
        if (it->is_null()) {
            out.reset();
            return;
        }
        if (!it->is_string()) throw ConfigError(path_ + "." + key + ": expected a string or null");
        out = it->get<std::string>();
    }

    template <std::size_t N>
    void read_array(const char* key, std::array<double, N>& out) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end()) return;
        const std::string where = path_ + "." + key;
        if (!it->is_array() || it->size() != N)
            throw ConfigError(where + ": expected an array of " + std::to_string(N) + " numbers");
        for (std::size_t i = 0; i < N; ++i) {
            if (!(*it)[i].is_number()) throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number");
            out[i] = (*it)[i].get<double>();
        }
    }

    std::optional<Reader> child(const char* key) {
        seen_.insert(key);
        auto it = node_.find(key);
        if (it == node_.end()) return std::nullopt;
        return std::optional<Reader>(std::in_place, *it, path_ + "." + key);
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

json stage_json(const StageSettings& s) {
    return {{"fov", s.fov},
            {"stride", s.stride},
            {"steps_per_direction", s.steps_per_direction},
            {"pitch", s.pitch},
            {"t0", s.sdedit.t0},
            {"guidance_scale", s.sdedit.guidance_scale},
            {"variance_scale", s.sdedit.variance_scale},
            {"diffusion_steps", s.sdedit.steps},
            {"risk_weights", {s.risk_weights.init, s.risk_weights.edge, s.risk_weights.color, s.risk_weights.smooth}},
            {"erase_fraction", s.erase_fraction}};
}

void read_stage(Reader& r, StageSettings& s) {
    r.read("fov", s.fov);
    r.read("stride", s.stride);
    r.read("steps_per_direction", s.steps_per_direction);
    r.read("pitch", s.pitch);
    r.read("t0", s.sdedit.t0);
    r.read("guidance_scale", s.sdedit.guidance_scale);
    r.read("variance_scale", s.sdedit.variance_scale);
    r.read("diffusion_steps", s.sdedit.steps);
    std::array<double, 4> w{s.risk_weights.init, s.risk_weights.edge, s.risk_weights.color, s.risk_weights.smooth};
    r.read_array("risk_weights", w);
    s.risk_weights = {w[0], w[1], w[2], w[3]};
    r.read("erase_fraction", s.erase_fraction);
    r.done();
}

json placement_json(const Placement& placement, const std::vector<ViewRef>& sources, const PathPlan& plan) {
    if (const auto* p = std::get_if<PlanarPlacement>(&placement)) {
        json j = {{"x_offset", p->x_offset}};
        if (!sources.empty())
            if (const StepSpec* src = plan.find(sources.front()))
                j["dx"] = p->x_offset - std::get<PlanarPlacement>(src->placement).x_offset;
        return j;
    }
    const auto& pose = std::get<CameraPose>(placement);
    return {{"pitch", pose.pitch}, {"yaw", pose.yaw}, {"fov", pose.fov}};
}

std::string view_name(const PathPlan& plan, const StepSpec& step) {
    std::string idx = step.role == StepRole::merge ? "merge"
                      : step.index > 0             ? "+" + std::to_string(step.index)
                                                   : std::to_string(step.index);
    if (plan.task == Task::full) return std::string(to_string(step.stage)) + "_" + idx;
    return idx;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return exit_invalid_config;
    if (dynamic_cast<const BackendError*>(&e)) return exit_backend_unreachable;
    if (dynamic_cast<const ContractViolation*>(&e)) return exit_contract_violation;
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        return exit_code_for(inner);
    } catch (...) {
    }
    return exit_failure;
}

std::string full_message(const std::exception& e) {
    std::string msg = e.what();
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        msg += ": " + full_message(inner);
    } catch (...) {
    }
    return msg;
}

const char* error_kind(int code) {
    switch (code) {
        case exit_invalid_config: return "invalid_config";
        case exit_backend_unreachable: return "backend";
        case exit_contract_violation: return "contract_violation";
        default: return "failure";
    }
}

void report(std::ostream& err, int code, const std::string& message) {
    err << json{{"error", {{"kind", error_kind(code)}, {"message", message}, {"exit_code", code}}}}.dump() << "\n";
}

void write_outputs(const RunConfig& config, const PathPlan& plan, const PipelineState& state,
                   const InstrumentedInpainter& backend, const std::optional<std::string>& error) {
    const fs::path root(config.output_dir);
    fs::create_directories(root / "views");
    if (state.canvas.width() > 0)
        write_png(root / (error ? "panorama_partial.png" : "panorama.png"), state.canvas.pixels());

    for (const StepSpec& step : plan.steps) {
        auto it = state.views.find(step.ref());
        if (it == state.views.end()) continue;
        const std::string name = view_name(plan, step);
        write_png(root / "views" / ("view_" + name + ".png"), it->second.image);
        if (config.dump_diagnostics) {
            fs::create_directories(root / "masks");
            fs::create_directories(root / "risks");
            write_png(root / "masks" / ("mask_" + name + ".png"), it->second.final_mask);
            static const char* kinds[4] = {"init", "edge", "color", "smooth"};
            for (int k = 0; k < 4; ++k)
                write_png(root / "risks" / ("risk_" + name + "_" + kinds[k] + ".png"), it->second.risks[k]);
            const auto& r = it->second.risks;
            write_png(root / "risks" / ("risk_" + name + "_combined.png"),
                      combine_risks({&r[0], &r[1], &r[2], &r[3]}, step.risk_weights));
        }
    }

    json diag = diagnostics_json(plan, state, &backend);
    if (error) diag["error"] = *error;
    write_text(root / "diagnostics.json", diag.dump(2) + "\n");

    json manifest = {{"tool", "panoweave"}, {"seed", config.pipeline.seed}, {"config", to_json(config)}};
    json steps = json::array();
    for (const StepSpec& step : plan.steps)
        steps.push_back({{"label", step.label()},
                         {"role", to_string(step.role)},
                         {"placement", placement_json(step.placement, step.sources, plan)},
                         {"seed", step.sdedit.seed}});
    manifest["plan"] = steps;
    write_text(root / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

json to_json(const RunConfig& c) {
    const PipelineConfig& p = c.pipeline;
    json j;
    j["task"] = to_string(p.task);
    j["prompt"] = p.prompt;
    j["negative_prompt"] = p.negative_prompt ? json(*p.negative_prompt) : json(nullptr);
    j["seed"] = p.seed;
    j["view_size"] = p.view_size;
    j["canvas"] = {{"width", p.equirect_canvas.width}, {"height", p.equirect_canvas.height}};
    j["planar"] = stage_json(p.planar);
    j["pano360"] = stage_json(p.pano360);
    j["expansion"] = stage_json(p.expansion);
    j["pole"] = stage_json(p.pole);
    j["prior_fraction"] = p.prior_fraction;
    j["risk"] = {{"axis_weights", {p.risk.axis_weights.horizontal, p.risk.axis_weights.vertical}},
                 {"edge_band", p.risk.edge_band},
                 {"edge_sigma", p.risk.edge_sigma},
                 {"color_sigma", p.risk.color_sigma},
                 {"smooth_sigma", p.risk.smooth_sigma}};
    const MaskFilterParams mf = p.mask_filter.value_or(MaskFilterParams{});
    j["mask_filter"] = {{"enabled", p.mask_filter.has_value()},
                        {"gauss_sigma", mf.gauss_sigma},
                        {"gauss_threshold", mf.gauss_threshold},
                        {"median_radius", mf.median_radius}};
    j["feather_width"] = p.feather_width;
    j["backend"] = {{"kind", c.backend.kind},
                    {"endpoint", c.backend.endpoint},
                    {"timeout_s", c.backend.timeout_s},
                    {"mock_sigma", c.backend.mock_sigma}};
    j["output_dir"] = c.output_dir;
    j["dump_diagnostics"] = c.dump_diagnostics;
    j["init_image"] = c.init_image;
    return j;
}

RunConfig apply_json(const json& doc, RunConfig c) {
    PipelineConfig& p = c.pipeline;
    Reader r(doc, "config");
    std::string task = to_string(p.task);
    r.read("task", task);
    p.task = parse_task(task);
    r.read("prompt", p.prompt);
    r.read_optional_string("negative_prompt", p.negative_prompt);
    r.read("seed", p.seed);
    r.read("view_size", p.view_size);
    if (auto canvas = r.child("canvas")) {
        canvas->read("width", p.equirect_canvas.width);
        canvas->read("height", p.equirect_canvas.height);
        canvas->done();
    }
    if (auto s = r.child("planar")) read_stage(*s, p.planar);
    if (auto s = r.child("pano360")) read_stage(*s, p.pano360);
    if (auto s = r.child("expansion")) read_stage(*s, p.expansion);
    if (auto s = r.child("pole")) read_stage(*s, p.pole);
    r.read("prior_fraction", p.prior_fraction);
    if (auto risk = r.child("risk")) {
        std::array<double, 2> axis{p.risk.axis_weights.horizontal, p.risk.axis_weights.vertical};
        risk->read_array("axis_weights", axis);
        p.risk.axis_weights = {axis[0], axis[1]};
        risk->read("edge_band", p.risk.edge_band);
        risk->read("edge_sigma", p.risk.edge_sigma);
        risk->read("color_sigma", p.risk.color_sigma);
        risk->read("smooth_sigma", p.risk.smooth_sigma);
        risk->done();
    }
    if (auto mf = r.child("mask_filter")) {
        bool enabled = p.mask_filter.has_value();
        MaskFilterParams params = p.mask_filter.value_or(MaskFilterParams{});
        mf->read("enabled", enabled);
        mf->read("gauss_sigma", params.gauss_sigma);
        mf->read("gauss_threshold", params.gauss_threshold);
        mf->read("median_radius", params.median_radius);
        mf->done();
        p.mask_filter = enabled ? std::optional(params) : std::nullopt;
    }
    r.read("feather_width", p.feather_width);
    if (auto b = r.child("backend")) {
        b->read("kind", c.backend.kind);
        b->read("endpoint", c.backend.endpoint);
        b->read("timeout_s", c.backend.timeout_s);
        b->read("mock_sigma", c.backend.mock_sigma);
        b->done();
    }
    r.read("output_dir", c.output_dir);
    r.read("dump_diagnostics", c.dump_diagnostics);
    r.read("init_image", c.init_image);
    r.done();
    return c;
}

void validate_shape(const RunConfig& config) {
    if (config.backend.kind != "mock" && config.backend.kind != "remote")
        throw ConfigError("config.backend.kind: expected \"mock\" or \"remote\"");
    if (config.backend.kind == "remote" && config.backend.endpoint.empty())
        throw ConfigError("config.backend.endpoint: required for the remote backend");
    if (!(config.backend.timeout_s > 0.0)) throw ConfigError("config.backend.timeout_s: must be > 0");
    if (!(config.backend.mock_sigma >= 0.0)) throw ConfigError("config.backend.mock_sigma: must be >= 0");
    if (config.output_dir.empty()) throw ConfigError("config.output_dir: must not be empty");
    PipelineConfig probe = config.pipeline;
    if (probe.prompt.empty()) probe.prompt = "-";
    probe.initial_image.reset();
    plan_paths(probe);
}

json diagnostics_json(const PathPlan& plan, const PipelineState& state, const InstrumentedInpainter* backend) {
    json steps = json::array();
    for (const StepDiagnostics& d : state.diagnostics.steps) {
        const StepSpec* spec = nullptr;
        for (const auto& s : plan.steps)
            if (s.label() == d.label) spec = &s;
        steps.push_back({{"label", d.label},
                         {"index", d.index},
                         {"stage", to_string(d.stage)},
                         {"role", to_string(d.role)},
                         {"pose", placement_json(d.placement, spec ? spec->sources : std::vector<ViewRef>{}, plan)},
                         {"mask_fraction_before_erase", d.unknown_after_warp},
                         {"mask_fraction_after_erase", d.unknown_after_erase},
                         {"mask_fraction_final", d.unknown_final},
                         {"seam_error", d.seam_error},
                         {"wall_ms", d.wall_ms},
                         {"backend_ms", d.backend_ms},
                         {"canvas_known", d.canvas_known},
                         {"skipped", d.skipped}});
    }
    json out = {{"task", to_string(plan.task)},
                {"canvas", {{"width", plan.canvas.width}, {"height", plan.canvas.height}}},
                {"steps", steps},
                {"warnings", state.diagnostics.warnings}};
    if (state.canvas.width() > 0) {
        out["canvas_known_fraction"] =
            static_cast<double>(state.canvas.known_count()) / static_cast<double>(state.canvas.size().area());
        if (state.canvas.kind() == CanvasKind::equirect) out["band40_coverage"] = band_coverage(state.canvas, 40.0);
    }
    if (backend != nullptr)
        out["backend"] = {{"name", backend->name()},
                          {"calls", backend->calls()},
                          {"max_in_flight", backend->max_in_flight()},
                          {"total_ms", backend->total_ms()}};
    return out;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Panorama generation by iterative warping and inpainting", "panoweave"};

    std::optional<std::string> task_pos, task_flag, prompt, negative, backend, endpoint, output_dir, init_image, config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> view_size, canvas_width, canvas_height, feather, median_radius, edge_band, steps_per_dir,
        planar_shift, planar_steps, diffusion_steps, expand_steps;
    std::optional<double> timeout, mock_sigma, fov, stride, t0, gs, vs, erase, expand_fov, expand_pitch, expand_stride,
        expand_t0, expand_gs, expand_vs, expand_erase, pole_fov, pole_t0, pole_gs, pole_vs, pole_erase, prior_fraction,
        mask_sigma, mask_threshold, edge_sigma, color_sigma, smooth_sigma;
    std::optional<std::vector<double>> risk_weights, expand_weights, pole_weights, axis_weights;
    bool dump = false, print_config = false, no_mask_filter = false;

    app.add_option("task_name", task_pos, "planar | pano360 | full");
    app.add_option("--task", task_flag, "planar | pano360 | full");
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_option("--prompt", prompt, "Text prompt");
    app.add_option("--negative-prompt", negative, "Negative prompt");
    app.add_option("--seed", seed, "Base seed");
    app.add_option("--backend", backend, "mock | remote");
    app.add_option("--endpoint", endpoint, "Diffusion service URL (remote backend)");
    app.add_option("--timeout", timeout, "Remote request timeout in seconds");
    app.add_option("--mock-sigma", mock_sigma, "Noise amplitude of the mock backend");
    app.add_option("--output-dir", output_dir, "Output directory");
    app.add_option("--init-image", init_image, "PNG used as the initial view");
    app.add_flag("--dump-diagnostics", dump, "Also write masks/ and risks/");
    app.add_flag("--print-config", print_config, "Print the resolved config as JSON and exit");

    app.add_option("--view-size", view_size, "View edge length in pixels");
    app.add_option("--canvas-width", canvas_width, "Equirect canvas width");
    app.add_option("--canvas-height", canvas_height, "Equirect canvas height");
    app.add_option("--planar-shift", planar_shift, "Planar translation per step in pixels");
    app.add_option("--planar-steps", planar_steps, "Planar steps per direction");
    app.add_option("--fov", fov, "Field of view of the 360 stage");
    app.add_option("--yaw-stride", stride, "Yaw stride of the 360 stage");
    app.add_option("--steps-per-direction", steps_per_dir, "Symmetric steps per direction (360 stage)");
    app.add_option("--t0", t0, "SDEdit start time of the main stage");
    app.add_option("--guidance-scale", gs, "Guidance scale of the main stage");
    app.add_option("--variance-scale", vs, "Initial-noise variance scale of the main stage");
    app.add_option("--diffusion-steps", diffusion_steps, "Denoising steps (all stages)");
    app.add_option("--erase-fraction", erase, "Fraction of known pixels erased per step (main stage)");
    app.add_option("--risk-weights", risk_weights, "init edge color smooth weights (main stage)")->expected(4);
    app.add_option("--expand-fov", expand_fov, "Expansion field of view");
    app.add_option("--expand-pitch", expand_pitch, "Expansion pitch offset");
    app.add_option("--expand-stride", expand_stride, "Expansion yaw stride");
    app.add_option("--expand-steps", expand_steps, "Expansion steps per direction");
    app.add_option("--expand-t0", expand_t0, "Expansion SDEdit start time");
    app.add_option("--expand-guidance-scale", expand_gs, "Expansion guidance scale");
    app.add_option("--expand-variance-scale", expand_vs, "Expansion variance scale");
    app.add_option("--expand-erase", expand_erase, "Expansion erase fraction");
    app.add_option("--expand-risk-weights", expand_weights, "Expansion risk weights")->expected(4);
    app.add_option("--pole-fov", pole_fov, "Pole close-up field of view");
    app.add_option("--pole-t0", pole_t0, "Pole SDEdit start time");
    app.add_option("--pole-guidance-scale", pole_gs, "Pole guidance scale");
    app.add_option("--pole-variance-scale", pole_vs, "Pole variance scale");
    app.add_option("--pole-erase", pole_erase, "Pole erase fraction");
    app.add_option("--pole-risk-weights", pole_weights, "Pole risk weights")->expected(4);
    app.add_option("--prior-fraction", prior_fraction, "Part of the initial view used as structure prior");
    app.add_option("--mask-sigma", mask_sigma, "Mask smoothing sigma");
    app.add_option("--mask-threshold", mask_threshold, "Mask smoothing threshold");
    app.add_option("--median-radius", median_radius, "Mask median filter radius");
    app.add_flag("--no-mask-filter", no_mask_filter, "Disable mask smoothing");
    app.add_option("--axis-weights", axis_weights, "Horizontal and vertical distance weights")->expected(2);
    app.add_option("--edge-band", edge_band, "Edge risk band in pixels");
    app.add_option("--edge-sigma", edge_sigma, "Edge risk blur sigma");
    app.add_option("--color-sigma", color_sigma, "Color risk blur sigma");
    app.add_option("--smooth-sigma", smooth_sigma, "Smoothness risk blur sigma");
    app.add_option("--feather", feather, "Feather width for overwritten regions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        report(err, exit_invalid_config, e.what());
        return exit_invalid_config;
    }

    RunConfig config;
    try {
        if (config_path) {
            std::ifstream in(*config_path);
            if (!in) throw ConfigError("cannot read config file " + *config_path);
            const json doc = json::parse(in, nullptr, false);
            if (doc.is_discarded()) throw ConfigError(*config_path + ": not valid JSON");
            config = apply_json(doc, config);
        }
        if (task_pos && task_flag && *task_pos != *task_flag) throw ConfigError("conflicting task names");
        if (task_flag) config.pipeline.task = parse_task(*task_flag);
        if (task_pos) config.pipeline.task = parse_task(*task_pos);

        PipelineConfig& p = config.pipeline;
        auto set = [](const auto& opt, auto& target) {
            if (opt) target = *opt;
        };
        auto set_weights = [](const std::optional<std::vector<double>>& opt, RiskWeights& w) {
            if (opt) w = {(*opt)[0], (*opt)[1], (*opt)[2], (*opt)[3]};
        };
        StageSettings& main = p.task == Task::planar ? p.planar : p.pano360;
        set(prompt, p.prompt);
        if (negative) p.negative_prompt = *negative;
        set(seed, p.seed);
        set(backend, config.backend.kind);
        set(endpoint, config.backend.endpoint);
        set(timeout, config.backend.timeout_s);
        set(mock_sigma, config.backend.mock_sigma);
        set(output_dir, config.output_dir);
        set(init_image, config.init_image);
        if (dump) config.dump_diagnostics = true;
        set(view_size, p.view_size);
        set(canvas_width, p.equirect_canvas.width);
        set(canvas_height, p.equirect_canvas.height);
        if (planar_shift) p.planar.stride = *planar_shift;
        set(planar_steps, p.planar.steps_per_direction);
        set(fov, p.pano360.fov);
        set(stride, p.pano360.stride);
        set(steps_per_dir, p.pano360.steps_per_direction);
        set(t0, main.sdedit.t0);
        set(gs, main.sdedit.guidance_scale);
        set(vs, main.sdedit.variance_scale);
        if (diffusion_steps)
            for (StageSettings* s : {&p.planar, &p.pano360, &p.expansion, &p.pole}) s->sdedit.steps = *diffusion_steps;
        set(erase, main.erase_fraction);
        set_weights(risk_weights, main.risk_weights);
        set(expand_fov, p.expansion.fov);
        set(expand_pitch, p.expansion.pitch);
        set(expand_stride, p.expansion.stride);
        set(expand_steps, p.expansion.steps_per_direction);
        set(expand_t0, p.expansion.sdedit.t0);
        set(expand_gs, p.expansion.sdedit.guidance_scale);
        set(expand_vs, p.expansion.sdedit.variance_scale);
        set(expand_erase, p.expansion.erase_fraction);
        set_weights(expand_weights, p.expansion.risk_weights);
        set(pole_fov, p.pole.fov);
        set(pole_t0, p.pole.sdedit.t0);
        set(pole_gs, p.pole.sdedit.guidance_scale);
        set(pole_vs, p.pole.sdedit.variance_scale);
        set(pole_erase, p.pole.erase_fraction);
        set_weights(pole_weights, p.pole.risk_weights);
        set(prior_fraction, p.prior_fraction);
        if (mask_sigma || mask_threshold || median_radius) {
            MaskFilterParams mf = p.mask_filter.value_or(MaskFilterParams{});
            set(mask_sigma, mf.gauss_sigma);
            set(mask_threshold, mf.gauss_threshold);
            set(median_radius, mf.median_radius);
            p.mask_filter = mf;
        }
        if (no_mask_filter) p.mask_filter.reset();
        if (axis_weights) p.risk.axis_weights = {(*axis_weights)[0], (*axis_weights)[1]};
        set(edge_band, p.risk.edge_band);
        set(edge_sigma, p.risk.edge_sigma);
        set(color_sigma, p.risk.color_sigma);
        set(smooth_sigma, p.risk.smooth_sigma);
        set(feather, p.feather_width);

        validate_shape(config);
        if (print_config) {
            out << to_json(config).dump(2) << "\n";
            return exit_ok;
        }
        if (!config.init_image.empty()) p.initial_image = read_png_image(config.init_image);
        validate(p);
    } catch (const std::exception& e) {
        const int code = dynamic_cast<const IoError*>(&e) ? exit_invalid_config : exit_code_for(e);
        report(err, code, full_message(e));
        return code;
    }

    std::unique_ptr<Inpainter> inner;
    try {
        if (config.backend.kind == "remote") {
            auto remote = std::make_unique<RemoteInpainter>(config.backend.endpoint, config.backend.timeout_s);
            if (!remote->healthy()) throw TransportError("backend unreachable at " + config.backend.endpoint);
            inner = std::move(remote);
        } else {
            inner = std::make_unique<MockInpainter>(config.backend.mock_sigma);
        }
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        report(err, code, full_message(e));
        return code;
    }

    InstrumentedInpainter instrumented(*inner);
    const PathPlan plan = plan_paths(config.pipeline);
    PipelineState state;
    std::optional<std::string> failure;
    int code = exit_ok;
    try {
        run_pipeline(config.pipeline, instrumented, state);
    } catch (const std::exception& e) {
        code = exit_code_for(e);
        failure = full_message(e);
    }
    try {
        write_outputs(config, plan, state, instrumented, failure);
    } catch (const std::exception& e) {
        if (!failure) {
            code = exit_failure;
            failure = full_message(e);
        }
    }
    for (const auto& w : state.diagnostics.warnings) err << "warning: " << w << "\n";
    if (failure) {
        report(err, code, *failure);
        return code;
    }
    return exit_ok;
}

}  // namespace panoweave::cli
