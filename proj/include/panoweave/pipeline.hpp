// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "panoweave/backend.hpp"
#include "panoweave/guidance.hpp"
#include "panoweave/imagecore.hpp"
#include "panoweave/projection.hpp"
#include "panoweave/risk.hpp"

namespace panoweave {

enum class Task { planar, pano360, full };
enum class Stage { planar, center, expand_up, expand_down, pole_top, pole_bottom };
enum class StepRole { initial, forward, backward, merge, expand_up, expand_down, pole_close };

const char* to_string(Task task);
const char* to_string(Stage stage);
const char* to_string(StepRole role);
Task parse_task(const std::string& name);

struct ViewRef {
    Stage stage = Stage::center;
    int index = 0;

    auto operator<=>(const ViewRef&) const = default;
};

std::string to_string(const ViewRef& ref);

/// Where a planar view sits in the strip.
struct PlanarPlacement {
    int x_offset = 0;

    bool operator==(const PlanarPlacement&) const = default;
};

using Placement = std::variant<CameraPose, PlanarPlacement>;

struct NoGuidance {
    bool operator==(const NoGuidance&) const = default;
};
struct PriorGuidance {
    PriorDirection direction = PriorDirection::up;
    bool operator==(const PriorGuidance&) const = default;
};
/// Guidance composed from both path ends: each half of the view takes the end
/// that supplies more of that half's warped content.
struct MergeGuidance {
    std::array<ViewRef, 2> ends;
    bool operator==(const MergeGuidance&) const = default;
};

using GuidanceSource = std::variant<NoGuidance, ViewRef, PriorGuidance, MergeGuidance>;

struct StepSpec {
    Stage stage = Stage::center;
    int index = 0;
    StepRole role = StepRole::initial;
    Placement placement;
    /// Generated views warped into this step, in fill priority order.
    std::vector<ViewRef> sources;
    GuidanceSource guidance;
    SdeditParams sdedit;  ///< seed already resolved per step
    double erase_fraction = 0.0;
    RiskWeights risk_weights;

    ViewRef ref() const { return {stage, index}; }
    std::string label() const;
};

struct PathPlan {
    Task task = Task::pano360;
    CanvasKind canvas_kind = CanvasKind::equirect;
    Size canvas;
    Size view;
    std::vector<StepSpec> steps;  ///< execution order

    std::vector<Stage> stages() const;
    const StepSpec* find(const ViewRef& ref) const;
};

/// Per-stage geometry and generation parameters. For the planar stage `stride`
/// is the translation in pixels and `fov`/`pitch` are unused.
struct StageSettings {
    double fov = 80.0;
    double stride = 40.0;
    int steps_per_direction = 3;
    double pitch = 0.0;
    SdeditParams sdedit;
    RiskWeights risk_weights;
    double erase_fraction = 0.0;

    bool operator==(const StageSettings&) const = default;
};

struct RiskSettings {
    AxisWeights axis_weights;
    int edge_band = 16;
    double edge_sigma = 16.0;
    double color_sigma = 4.0;
    double smooth_sigma = 4.0;

    bool operator==(const RiskSettings&) const = default;
};

struct PipelineConfig {
    Task task = Task::pano360;
    std::string prompt;
    std::optional<std::string> negative_prompt;
    std::uint64_t seed = 0;

    int view_size = 512;
    Size equirect_canvas{4096, 2048};

    StageSettings planar = default_planar();
    StageSettings pano360 = default_pano360();
    StageSettings expansion = default_expansion();
    StageSettings pole = default_pole();
    double prior_fraction = 1.0 / 3.0;

    RiskSettings risk;
    std::optional<MaskFilterParams> mask_filter = MaskFilterParams{};
    int feather_width = 0;

    /// Used as view 0 instead of generating it.
    std::optional<ViewImage> initial_image;

    static StageSettings default_planar();
    static StageSettings default_pano360();
    static StageSettings default_expansion();
    static StageSettings default_pole();
};

/// Throws ConfigError with a precise message.
void validate(const PipelineConfig& config);

PathPlan plan_paths(const PipelineConfig& config);

/// Throws SequencingError if a forward/backward step breaks the symmetric
/// guidance rule or references a view that is not generated earlier in the plan.
void check_plan(const PathPlan& plan);

// ---------------------------------------------------------------------------

struct GeneratedView {
    ViewImage image;
    Placement placement;
    /// init, edge, color, smooth
    std::array<RiskMap, 4> risks;
    Mask final_mask;
};

struct StepDiagnostics {
    std::string label;
    Stage stage = Stage::center;
    int index = 0;
    StepRole role = StepRole::initial;
    Placement placement;
    double unknown_after_warp = 0.0;
    double unknown_after_erase = 0.0;
    double unknown_final = 0.0;
    double seam_error = 0.0;
    double wall_ms = 0.0;
    double backend_ms = 0.0;
    std::size_t canvas_known = 0;
    bool skipped = false;
};

struct Diagnostics {
    std::vector<StepDiagnostics> steps;
    std::vector<std::string> warnings;
};

struct PipelineState {
    PanoCanvas canvas;
    std::map<ViewRef, GeneratedView> views;
    std::map<Stage, RowStats> row_stats;
    Diagnostics diagnostics;
};

PipelineState make_state(const PathPlan& plan);

/// Everything a step computes before calling the inpainter.
struct PreparedStep {
    ViewImage warped;
    Mask geometric;  ///< unknown after warping sources and canvas
    RiskMap warped_risk;
    Mask erased;
    Mask final_mask;
    ViewImage guide;
    InpaintRequest request;
    RenderedView canvas_view;  ///< canvas content before this step
};

/// Guidance view for forward/backward steps: x_{-i} for +(i+1), x_{+i} for -(i+1).
const ViewImage& select_symmetric_guidance(const PipelineState& state, const StepSpec& step);

PreparedStep prepare_step(const PipelineState& state, const PathPlan& plan, const StepSpec& step,
                          const PipelineConfig& config);

/// Executes one warp/erase/guide/inpaint/commit step. Merge steps are routed to close_loop_merge.
void run_step(PipelineState& state, const PathPlan& plan, const StepSpec& step, Inpainter& inpainter,
              const PipelineConfig& config);

void close_loop_merge(PipelineState& state, const PathPlan& plan, const StepSpec& step, Inpainter& inpainter,
                      const PipelineConfig& config);

/// Runs every step of plan_paths(config) in order. `state` is owned by the
/// caller so partial results survive a failure; failures are rethrown as a
/// StepError with the original exception nested.
void run_pipeline(const PipelineConfig& config, Inpainter& inpainter, PipelineState& state);
PipelineState run_pipeline(const PipelineConfig& config, Inpainter& inpainter);

/// Fraction of canvas texels with |pitch| <= max_abs_pitch that are known.
double band_coverage(const PanoCanvas& canvas, double max_abs_pitch);

}  // namespace panoweave
