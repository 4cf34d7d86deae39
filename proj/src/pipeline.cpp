// SPDX-License-Identifier: Apache-2.0

#include "panoweave/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>

namespace panoweave {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_stage_common(const StageSettings& s, const char* name) {
    auto fail = [&](const std::string& what) { throw ConfigError(std::string(name) + ": " + what); };
    try {
        validate(s.sdedit);
        validate(s.risk_weights);
    } catch (const ParameterError& e) {
        fail(e.what());
    }
    if (!(s.erase_fraction >= 0.0 && s.erase_fraction <= 1.0)) fail("erase_fraction must lie in [0, 1]");
}

void check_spherical_stage(const StageSettings& s, const char* name) {
    check_stage_common(s, name);
    auto fail = [&](const std::string& what) { throw ConfigError(std::string(name) + ": " + what); };
    if (!(s.fov > 0.0 && s.fov < 180.0)) fail("fov must lie in (0, 180)");
    if (!(s.stride > 0.0)) fail("stride must be > 0");
    if (s.stride > s.fov) fail("stride " + std::to_string(s.stride) + " exceeds fov " + std::to_string(s.fov) + ", consecutive views would not overlap");
    if (s.steps_per_direction < 1) fail("steps_per_direction must be >= 1");
    const double reach = s.steps_per_direction * s.stride;
    if (reach >= 180.0) fail("steps_per_direction * stride must stay below 180 degrees");
    if (180.0 - reach >= s.fov) fail("merge view at yaw 180 would not overlap either path end");
}

CameraPose pose_of(const Placement& p) { return std::get<CameraPose>(p); }

/// Views of one bidirectional sub-plan around yaw, interleaved +1, -1, +2, -2, ..., merge.
void append_yaw_paths(Stage stage, const StageSettings& s, std::vector<StepSpec>& out) {
    for (int k = 1; k <= s.steps_per_direction; ++k) {
        for (int sign : {+1, -1}) {
            StepSpec step;
            step.stage = stage;
            step.index = sign * k;
            step.role = sign > 0 ? StepRole::forward : StepRole::backward;
            step.placement = make_pose(s.pitch, sign * k * s.stride, s.fov);
            step.sources = {{stage, sign * (k - 1)}};
            step.guidance = ViewRef{stage, -sign * (k - 1)};
            step.sdedit = s.sdedit;
            step.erase_fraction = s.erase_fraction;
            step.risk_weights = s.risk_weights;
            out.push_back(step);
        }
    }
    const int n = s.steps_per_direction;
    StepSpec merge;
    merge.stage = stage;
    merge.index = n + 1;
    merge.role = StepRole::merge;
    merge.placement = make_pose(s.pitch, 180.0, s.fov);
    merge.sources = {{stage, n}, {stage, -n}};
    merge.guidance = MergeGuidance{{ViewRef{stage, n}, ViewRef{stage, -n}}};
    merge.sdedit = s.sdedit;
    merge.erase_fraction = s.erase_fraction;
    merge.risk_weights = s.risk_weights;
    out.push_back(merge);
}

StepSpec single_view(Stage stage, StepRole role, const CameraPose& pose, const StageSettings& s, GuidanceSource g) {
    StepSpec step;
    step.stage = stage;
    step.index = 0;
    step.role = role;
    step.placement = pose;
    step.guidance = g;
    step.sdedit = s.sdedit;
    step.erase_fraction = s.erase_fraction;
    step.risk_weights = s.risk_weights;
    return step;
}

const GeneratedView& require_view(const PipelineState& state, const ViewRef& ref, const StepSpec& step) {
    auto it = state.views.find(ref);
    if (it == state.views.end())
        throw SequencingError("step " + step.label() + " needs view " + to_string(ref) + ", which is not generated yet");
    return it->second;
}

/// Initial view of the stage, the origin of its generation path.
PanoPoint path_origin(const PathPlan& plan, Stage stage) {
    const StepSpec* first = plan.find({stage, 0});
    if (first == nullptr) throw SequencingError(std::string("stage ") + to_string(stage) + " has no initial view");
    if (const auto* planar = std::get_if<PlanarPlacement>(&first->placement))
        return {planar->x_offset + plan.view.width / 2.0, plan.view.height / 2.0};
    const CameraPose pose = pose_of(first->placement);
    return {pose.yaw, pose.pitch};
}

const GeneratedView& initial_view(const PipelineState& state, const PathPlan& plan, const StepSpec& step) {
    const Stage stage = plan.task == Task::planar ? Stage::planar : Stage::center;
    return require_view(state, {stage, 0}, step);
}

std::array<RiskMap, 4> estimate_risks(const ViewImage& view, const Placement& placement, PanoPoint origin,
                                      const RowStats& stats, const RiskSettings& rs) {
    const PanoCoords coords = std::holds_alternative<PlanarPlacement>(placement)
                                  ? planar_coords(view.size(), std::get<PlanarPlacement>(placement).x_offset)
                                  : spherical_coords(view.size(), pose_of(placement));
    return {risk_init(coords, origin, rs.axis_weights), risk_edge(view.size(), rs.edge_band, rs.edge_sigma),
            risk_color(view, stats, rs.color_sigma), risk_smooth(view, stats, rs.smooth_sigma)};
}

RiskMap combined_risk(const std::array<RiskMap, 4>& r, const RiskWeights& w) {
    return combine_risks({&r[0], &r[1], &r[2], &r[3]}, w);
}

double seam_error(const ViewImage& view, const RenderedView& before) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < view.height(); ++y)
        for (int x = 0; x < view.width(); ++x) {
            if (before.known.at(x, y) < 0.5f) continue;
            for (int c = 0; c < 3; ++c) sum += std::abs(view.at(x, y, c) - before.image.at(x, y, c));
            n += 3;
        }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

void verify_preservation(const InpaintRequest& request, const ViewImage& out, double tolerance, const StepSpec& step) {
    if (out.size() != request.image.size())
        throw ContractViolation("step " + step.label() + ": inpainter returned " + to_string(out.size()) +
                                ", expected " + to_string(request.image.size()));
    std::size_t violations = 0;
    std::size_t known = 0;
    double abs_sum = 0.0;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            if (request.mask.at(x, y) != 0.0f) continue;
            ++known;
            for (int c = 0; c < 3; ++c) {
                const float a = out.at(x, y, c);
                const float b = request.image.at(x, y, c);
                if (a != b) ++violations;
                abs_sum += std::abs(a - b);
            }
        }
    if (tolerance == 0.0) {
        if (violations > 0)
            throw ContractViolation("step " + step.label() + ": " + std::to_string(violations) +
                                    " known channel values changed by the inpainter");
        return;
    }
    const double mean = known == 0 ? 0.0 : abs_sum / (3.0 * known);
    if (mean > tolerance)
        throw ContractViolation("step " + step.label() + ": known pixels drifted by mean " + std::to_string(mean) +
                                " > " + std::to_string(tolerance));
}

ViewImage merge_guide(const PipelineState& state, const PathPlan& plan, const StepSpec& step, const MergeGuidance& g) {
    // Each half of the merge view takes the path end whose warp covers more of it.
    const Size vs = plan.view;
    const CameraPose dst = pose_of(step.placement);
    std::array<std::array<std::size_t, 2>, 2> coverage{};  // [end][half]
    std::array<const ViewImage*, 2> images{};
    for (int e = 0; e < 2; ++e) {
        const GeneratedView& v = require_view(state, g.ends[e], step);
        images[e] = &v.image;
        const Mask unknown = rotate_warp(v.risks[0], pose_of(v.placement), dst).unknown;
        for (int y = 0; y < vs.height; ++y)
            for (int x = 0; x < vs.width; ++x)
                if (unknown.at(x, y) < 0.5f) ++coverage[e][x < vs.width / 2 ? 0 : 1];
    }
    const int left = coverage[0][0] >= coverage[1][0] ? 0 : 1;
    const int right = left == 0 ? 1 : 0;
    ViewImage guide(vs);
    for (int y = 0; y < vs.height; ++y)
        for (int x = 0; x < vs.width; ++x) {
            const ViewImage& src = x < vs.width / 2 ? *images[left] : *images[right];
            std::copy_n(src.pixel(x, y), 3, guide.pixel(x, y));
        }
    return guide;
}

ViewImage guidance_for(const PipelineState& state, const PathPlan& plan, const StepSpec& step,
                       const PipelineConfig& config, const ViewImage& warped) {
    return std::visit(
        [&](const auto& g) -> ViewImage {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, NoGuidance>) {
                return warped;
            } else if constexpr (std::is_same_v<G, ViewRef>) {
                return select_symmetric_guidance(state, step);
            } else if constexpr (std::is_same_v<G, PriorGuidance>) {
                return extract_prior(initial_view(state, plan, step).image, config.prior_fraction, plan.view,
                                     g.direction);
            } else {
                return merge_guide(state, plan, step, g);
            }
        },
        step.guidance);
}

}  // namespace

// ---------------------------------------------------------------------------

const char* to_string(Task task) {
    switch (task) {
        case Task::planar: return "planar";
        case Task::pano360: return "pano360";
        case Task::full: return "full";
    }
    return "?";
}

const char* to_string(Stage stage) {
    switch (stage) {
        case Stage::planar: return "planar";
        case Stage::center: return "center";
        case Stage::expand_up: return "up";
        case Stage::expand_down: return "down";
        case Stage::pole_top: return "top";
        case Stage::pole_bottom: return "bottom";
    }
    return "?";
}

const char* to_string(StepRole role) {
    switch (role) {
        case StepRole::initial: return "initial";
        case StepRole::forward: return "forward";
        case StepRole::backward: return "backward";
        case StepRole::merge: return "merge";
        case StepRole::expand_up: return "expand_up";
        case StepRole::expand_down: return "expand_down";
        case StepRole::pole_close: return "pole_close";
    }
    return "?";
}

Task parse_task(const std::string& name) {
    if (name == "planar") return Task::planar;
    if (name == "pano360") return Task::pano360;
    if (name == "full") return Task::full;
    throw ConfigError("unknown task '" + name + "' (expected planar, pano360 or full)");
}

std::string to_string(const ViewRef& ref) {
    std::string idx = ref.index > 0 ? "+" + std::to_string(ref.index) : std::to_string(ref.index);
    return std::string(to_string(ref.stage)) + ":" + idx;
}

std::string StepSpec::label() const {
    if (role == StepRole::merge) return std::string(to_string(stage)) + ":merge";
    return to_string(ref());
}

std::vector<Stage> PathPlan::stages() const {
    std::vector<Stage> out;
    for (const auto& s : steps)
        if (out.empty() || out.back() != s.stage) out.push_back(s.stage);
    return out;
}

const StepSpec* PathPlan::find(const ViewRef& ref) const {
    for (const auto& s : steps)
        if (s.ref() == ref) return &s;
    return nullptr;
}

StageSettings PipelineConfig::default_planar() {
    StageSettings s;
    s.fov = 0.0;
    s.stride = 256.0;
    s.steps_per_direction = 5;
    s.sdedit = SdeditParams{0.98, 7.5, 1.0, 50, 0};
    s.risk_weights = {1.0, 0.0, 0.0, 0.0};
    s.erase_fraction = 0.30;
    return s;
}

StageSettings PipelineConfig::default_pano360() {
    StageSettings s;
    s.fov = 80.0;
    s.stride = 40.0;
    s.steps_per_direction = 3;
    s.pitch = 0.0;
    s.sdedit = SdeditParams{0.98, 7.5, 1.0, 50, 0};
    s.risk_weights = {0.8, 0.2, 0.0, 0.0};
    s.erase_fraction = 0.05;
    return s;
}

StageSettings PipelineConfig::default_expansion() {
    StageSettings s;
    s.fov = 110.0;
    s.stride = 80.0;
    s.steps_per_direction = 1;
    s.pitch = 25.0;
    s.sdedit = SdeditParams{0.90, 2.0, 1.05, 50, 0};
    s.risk_weights = {0.6, 0.2, 0.1, 0.1};
    s.erase_fraction = 0.10;
    return s;
}

StageSettings PipelineConfig::default_pole() {
    StageSettings s;
    s.fov = 90.0;
    s.stride = 0.0;
    s.steps_per_direction = 0;
    s.pitch = 90.0;
    s.sdedit = SdeditParams{0.90, 1.0, 1.1, 50, 0};
    s.risk_weights = {0.6, 0.2, 0.1, 0.1};
    s.erase_fraction = 0.20;
    return s;
}

void validate(const PipelineConfig& c) {
    if (c.prompt.empty()) throw ConfigError("prompt required");
    if (c.view_size < 8) throw ConfigError("view_size must be >= 8");
    if (!(c.prior_fraction > 0.0 && c.prior_fraction <= 1.0)) throw ConfigError("prior_fraction must lie in (0, 1]");
    if (c.feather_width < 0) throw ConfigError("feather_width must be >= 0");
    if (c.risk.edge_band < 1) throw ConfigError("risk.edge_band must be >= 1");
    if (c.risk.edge_sigma < 0 || c.risk.color_sigma < 0 || c.risk.smooth_sigma < 0)
        throw ConfigError("risk sigmas must be >= 0");
    const AxisWeights& a = c.risk.axis_weights;
    if (!(a.horizontal >= 0 && a.vertical >= 0) || (a.horizontal == 0 && a.vertical == 0))
        throw ConfigError("risk.axis_weights must be >= 0 and not both zero");
    if (c.mask_filter) {
        try {
            validate(*c.mask_filter);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("mask_filter: ") + e.what());
        }
    }
    if (c.initial_image && c.initial_image->size() != Size{c.view_size, c.view_size})
        throw ConfigError("initial image is " + to_string(c.initial_image->size()) + ", expected " +
                          to_string(Size{c.view_size, c.view_size}));

    if (c.task == Task::planar) {
        check_stage_common(c.planar, "planar");
        if (!(c.planar.stride > 0.0) || c.planar.stride > c.view_size || c.planar.stride != std::floor(c.planar.stride))
            throw ConfigError("planar: shift must be a whole number of pixels in (0, view_size]");
        if (c.planar.steps_per_direction < 1) throw ConfigError("planar: steps_per_direction must be >= 1");
        return;
    }
    if (c.equirect_canvas.width < 2 || c.equirect_canvas.height < 2)
        throw ConfigError("equirect canvas must be at least 2x2");
    if (c.pano360.pitch != 0.0) throw ConfigError("pano360: the central band is generated at pitch 0");
    check_spherical_stage(c.pano360, "pano360");
    if (c.task == Task::full) {
        check_spherical_stage(c.expansion, "expansion");
        if (!(c.expansion.pitch > 0.0 && c.expansion.pitch < 90.0))
            throw ConfigError("expansion: pitch offset must lie in (0, 90)");
        check_stage_common(c.pole, "pole");
        if (!(c.pole.fov > 0.0 && c.pole.fov < 180.0)) throw ConfigError("pole: fov must lie in (0, 180)");
    }
}

PathPlan plan_paths(const PipelineConfig& config) {
    validate(config);
    PathPlan plan;
    plan.task = config.task;
    plan.view = {config.view_size, config.view_size};
    std::vector<StepSpec> steps;

    if (config.task == Task::planar) {
        const StageSettings& s = config.planar;
        const int shift = static_cast<int>(s.stride);
        const int n = s.steps_per_direction;
        plan.canvas_kind = CanvasKind::planar;
        plan.canvas = {config.view_size + 2 * n * shift, config.view_size};
        const int origin = n * shift;

        StepSpec init;
        init.stage = Stage::planar;
        init.role = StepRole::initial;
        init.placement = PlanarPlacement{origin};
        init.guidance = NoGuidance{};
        init.sdedit = s.sdedit;
        init.erase_fraction = s.erase_fraction;
        init.risk_weights = s.risk_weights;
        steps.push_back(init);
        for (int k = 1; k <= n; ++k)
            for (int sign : {+1, -1}) {
                StepSpec step = init;
                step.index = sign * k;
                step.role = sign > 0 ? StepRole::forward : StepRole::backward;
                step.placement = PlanarPlacement{origin + sign * k * shift};
                step.sources = {{Stage::planar, sign * (k - 1)}};
                step.guidance = ViewRef{Stage::planar, -sign * (k - 1)};
                steps.push_back(step);
            }
    } else {
        plan.canvas_kind = CanvasKind::equirect;
        plan.canvas = config.equirect_canvas;
        const StageSettings& c = config.pano360;
        steps.push_back(single_view(Stage::center, StepRole::initial, make_pose(0.0, 0.0, c.fov), c, NoGuidance{}));
        append_yaw_paths(Stage::center, c, steps);

        if (config.task == Task::full) {
            const StageSettings& e = config.expansion;
            for (int sign : {+1, -1}) {
                const Stage stage = sign > 0 ? Stage::expand_up : Stage::expand_down;
                StageSettings stage_settings = e;
                stage_settings.pitch = sign * e.pitch;
                steps.push_back(single_view(stage, sign > 0 ? StepRole::expand_up : StepRole::expand_down,
                                            make_pose(sign * e.pitch, 0.0, e.fov), stage_settings,
                                            PriorGuidance{sign > 0 ? PriorDirection::up : PriorDirection::down}));
                append_yaw_paths(stage, stage_settings, steps);
            }
            const StageSettings& p = config.pole;
            steps.push_back(single_view(Stage::pole_top, StepRole::pole_close, make_pose(90.0, 0.0, p.fov), p,
                                        PriorGuidance{PriorDirection::up}));
            steps.push_back(single_view(Stage::pole_bottom, StepRole::pole_close, make_pose(-90.0, 0.0, p.fov), p,
                                        PriorGuidance{PriorDirection::down}));
        }
    }

    for (std::size_t i = 0; i < steps.size(); ++i) steps[i].sdedit.seed = config.seed + i;
    plan.steps = std::move(steps);
    check_plan(plan);
    return plan;
}

void check_plan(const PathPlan& plan) {
    std::set<ViewRef> seen;
    for (const auto& step : plan.steps) {
        for (const auto& src : step.sources)
            if (!seen.count(src))
                throw SequencingError("step " + step.label() + " warps " + to_string(src) + " before it exists");
        if (step.role == StepRole::forward || step.role == StepRole::backward) {
            const int i = std::abs(step.index) - 1;
            const int expected = step.role == StepRole::forward ? -i : i;
            const auto* g = std::get_if<ViewRef>(&step.guidance);
            if (g == nullptr || g->stage != step.stage || g->index != expected)
                throw SequencingError("step " + step.label() + " breaks the symmetric guidance rule");
            if (!seen.count(*g))
                throw SequencingError("step " + step.label() + " is guided by " + to_string(*g) + " before it exists");
        }
        if (const auto* m = std::get_if<MergeGuidance>(&step.guidance))
            for (const auto& end : m->ends)
                if (!seen.count(end)) throw SequencingError("merge " + step.label() + " precedes path end " + to_string(end));
        if (!seen.insert(step.ref()).second) throw SequencingError("view " + step.label() + " planned twice");
    }
}

// ---------------------------------------------------------------------------

PipelineState make_state(const PathPlan& plan) {
    PipelineState state;
    state.canvas = PanoCanvas(plan.canvas_kind, plan.canvas.width, plan.canvas.height);
    return state;
}

const ViewImage& select_symmetric_guidance(const PipelineState& state, const StepSpec& step) {
    const auto* ref = std::get_if<ViewRef>(&step.guidance);
    if (ref == nullptr) throw SequencingError("step " + step.label() + " has no symmetric guidance view");
    return require_view(state, *ref, step).image;
}

PreparedStep prepare_step(const PipelineState& state, const PathPlan& plan, const StepSpec& step,
                          const PipelineConfig& config) {
    const Size vs = plan.view;
    const bool planar = std::holds_alternative<PlanarPlacement>(step.placement);

    ViewImage warped(vs);
    Mask unknown(vs, 1.0f);
    RiskMap risk(vs);
    auto absorb = [&](const auto& image, const Mask& holes, const RiskMap& r) {
        for (int y = 0; y < vs.height; ++y)
            for (int x = 0; x < vs.width; ++x) {
                if (unknown.at(x, y) < 0.5f || holes.at(x, y) >= 0.5f) continue;
                std::copy_n(image.pixel(x, y), 3, warped.pixel(x, y));
                risk.at(x, y) = r.at(x, y);
                unknown.at(x, y) = 0.0f;
            }
    };

    for (const ViewRef& ref : step.sources) {
        const GeneratedView& src = require_view(state, ref, step);
        const RiskMap src_risk = combined_risk(src.risks, step.risk_weights);
        if (planar) {
            const double dx = std::get<PlanarPlacement>(step.placement).x_offset -
                              std::get<PlanarPlacement>(src.placement).x_offset;
            const WarpResult w = planar_shift_warp(src.image, dx);
            absorb(w.image, w.unknown, planar_shift_warp(src_risk, dx).image);
        } else {
            const CameraPose from = pose_of(src.placement);
            const CameraPose to = pose_of(step.placement);
            const WarpResult w = rotate_warp(src.image, from, to);
            absorb(w.image, w.unknown, rotate_warp(src_risk, from, to).image);
        }
    }

    RenderedView canvas_view = planar ? crop_planar(state.canvas, std::get<PlanarPlacement>(step.placement).x_offset, vs)
                                      : render_view(state.canvas, pose_of(step.placement), vs);
    absorb(canvas_view.image, invert(canvas_view.known), canvas_view.risk);

    Mask erased = erase_by_risk(unknown, risk, step.erase_fraction);
    Mask final_mask = config.mask_filter ? pixelwise_max(filter_mask(erased, *config.mask_filter), unknown) : erased;

    ViewImage guide = guidance_for(state, plan, step, config, warped);
    ViewImage composed = paste_guidance(warped, final_mask, guide);
    InpaintRequest request =
        build_inpaint_request(std::move(composed), final_mask, config.prompt, step.sdedit, config.negative_prompt);

    return {std::move(warped),     std::move(unknown), std::move(risk),    std::move(erased),
            std::move(final_mask), std::move(guide),   std::move(request), std::move(canvas_view)};
}

namespace {

void finish_step(PipelineState& state, const PathPlan& plan, const StepSpec& step, const PipelineConfig& config,
                 PreparedStep&& prepared, ViewImage view, StepDiagnostics& diag) {
    diag.seam_error = seam_error(view, prepared.canvas_view);

    auto [it, inserted] = state.row_stats.try_emplace(step.stage, plan.view.height);
    it->second.add_view(view);
    auto risks = estimate_risks(view, step.placement, path_origin(plan, step.stage), it->second, config.risk);
    const RiskMap own_risk = combined_risk(risks, step.risk_weights);

    CommitOptions options;
    options.regenerated = &prepared.final_mask;
    options.feather_width = config.feather_width;
    options.risk = &own_risk;
    if (const auto* p = std::get_if<PlanarPlacement>(&step.placement))
        commit_planar(state.canvas, view, p->x_offset, options);
    else
        commit_view(state.canvas, view, pose_of(step.placement), options);

    state.views[step.ref()] = GeneratedView{std::move(view), step.placement, std::move(risks),
                                            std::move(prepared.final_mask)};
    diag.canvas_known = state.canvas.known_count();
}

StepDiagnostics begin_diag(const StepSpec& step) {
    StepDiagnostics d;
    d.label = step.label();
    d.stage = step.stage;
    d.index = step.index;
    d.role = step.role;
    d.placement = step.placement;
    return d;
}

void fill_fractions(StepDiagnostics& d, const PreparedStep& p) {
    d.unknown_after_warp = unknown_fraction(p.geometric);
    d.unknown_after_erase = unknown_fraction(p.erased);
    d.unknown_final = unknown_fraction(p.final_mask);
}

}  // namespace

void run_step(PipelineState& state, const PathPlan& plan, const StepSpec& step, Inpainter& inpainter,
              const PipelineConfig& config) {
    if (step.role == StepRole::merge) {
        close_loop_merge(state, plan, step, inpainter, config);
        return;
    }
    const auto start = Clock::now();
    StepDiagnostics diag = begin_diag(step);
    PreparedStep prepared = prepare_step(state, plan, step, config);
    fill_fractions(diag, prepared);

    ViewImage view;
    const bool supplied_initial = step.role == StepRole::initial && config.initial_image.has_value();
    if (supplied_initial) {
        view = *config.initial_image;
    } else {
        const auto call = Clock::now();
        view = inpainter.inpaint(prepared.request);
        diag.backend_ms = ms_since(call);
        verify_preservation(prepared.request, view, inpainter.preservation_tolerance(), step);
    }
    finish_step(state, plan, step, config, std::move(prepared), std::move(view), diag);
    diag.wall_ms = ms_since(start);
    state.diagnostics.steps.push_back(std::move(diag));
}

void close_loop_merge(PipelineState& state, const PathPlan& plan, const StepSpec& step, Inpainter& inpainter,
                      const PipelineConfig& config) {
    if (step.role != StepRole::merge) throw SequencingError("close_loop_merge called for " + step.label());
    const auto start = Clock::now();
    StepDiagnostics diag = begin_diag(step);
    PreparedStep prepared = prepare_step(state, plan, step, config);
    fill_fractions(diag, prepared);

    if (diag.unknown_after_warp == 0.0) {
        diag.skipped = true;
        diag.canvas_known = state.canvas.known_count();
        diag.wall_ms = ms_since(start);
        state.diagnostics.warnings.push_back("merge view " + step.label() + " is already fully known; skipped");
        state.diagnostics.steps.push_back(std::move(diag));
        return;
    }

    const auto call = Clock::now();
    ViewImage view = inpainter.inpaint(prepared.request);
    diag.backend_ms = ms_since(call);
    verify_preservation(prepared.request, view, inpainter.preservation_tolerance(), step);
    finish_step(state, plan, step, config, std::move(prepared), std::move(view), diag);
    diag.wall_ms = ms_since(start);
    state.diagnostics.steps.push_back(std::move(diag));
}

void run_pipeline(const PipelineConfig& config, Inpainter& inpainter, PipelineState& state) {
    const PathPlan plan = plan_paths(config);
    state = make_state(plan);
    for (const StepSpec& step : plan.steps) {
        try {
            run_step(state, plan, step, inpainter, config);
        } catch (...) {
            std::throw_with_nested(StepError(step.label()));
        }
    }
}

PipelineState run_pipeline(const PipelineConfig& config, Inpainter& inpainter) {
    PipelineState state;
    run_pipeline(config, inpainter, state);
    return state;
}

double band_coverage(const PanoCanvas& canvas, double max_abs_pitch) {
    if (canvas.kind() != CanvasKind::equirect) throw UnsupportedKind("band_coverage needs an equirect canvas");
    std::size_t total = 0;
    std::size_t known = 0;
    for (int r = 0; r < canvas.height(); ++r) {
        if (std::abs(canvas_row_pitch(r, canvas.height())) > max_abs_pitch) continue;
        for (int c = 0; c < canvas.width(); ++c) {
            ++total;
            known += canvas.known(c, r) ? 1 : 0;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(known) / static_cast<double>(total);
}

}  // namespace panoweave
