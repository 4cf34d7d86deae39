// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "panoweave/pipeline.hpp"
#include "support.hpp"

using namespace panoweave;
using panoweave::testing::OracleCamera;

namespace {

PipelineConfig small_config(Task task) {
    PipelineConfig c;
    c.task = task;
    c.prompt = "a quiet lake";
    c.seed = 3;
    c.view_size = 128;
    c.equirect_canvas = {1024, 512};
    c.planar.stride = 64;
    return c;
}

CameraPose pose(const StepSpec& s) { return std::get<CameraPose>(s.placement); }

/// Breaks the known-pixel contract on purpose.
class SloppyInpainter final : public Inpainter {
public:
    ViewImage inpaint(const InpaintRequest& r) override {
        ViewImage out = mock_inpaint(r);
        out.at(0, 0, 0) = out.at(0, 0, 0) > 0.5f ? 0.0f : 1.0f;
        return out;
    }
    std::string name() const override { return "sloppy"; }
};

}  // namespace

TEST_CASE("planar plan defaults") {
    PipelineConfig c;
    c.task = Task::planar;
    c.prompt = "x";
    const PathPlan plan = plan_paths(c);
    CHECK(plan.steps.size() == 11);
    CHECK(plan.canvas == Size{3072, 512});
    CHECK(plan.view == Size{512, 512});
    CHECK(plan.canvas_kind == CanvasKind::planar);
    const int origin = std::get<PlanarPlacement>(plan.steps[0].placement).x_offset;
    CHECK(origin == 1280);
    const std::vector<int> order{0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5};
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const StepSpec& s = plan.steps[i];
        CHECK(s.index == order[i]);
        CHECK(std::get<PlanarPlacement>(s.placement).x_offset - origin == 256 * s.index);
        CHECK(s.sdedit.t0 == 0.98);
        CHECK(s.erase_fraction == 0.30);
        CHECK(s.risk_weights == RiskWeights{1, 0, 0, 0});
        CHECK(s.sdedit.seed == c.seed + i);
        if (i > 0) {
            const int dx = std::get<PlanarPlacement>(s.placement).x_offset -
                           std::get<PlanarPlacement>(plan.find(s.sources[0])->placement).x_offset;
            CHECK(std::abs(dx) == 256);
        }
    }
}

TEST_CASE("pano360 plan defaults") {
    PipelineConfig c;
    c.prompt = "x";
    const PathPlan plan = plan_paths(c);
    REQUIRE(plan.steps.size() == 8);
    CHECK(plan.canvas == Size{4096, 2048});
    const std::vector<double> yaws{0, 40, -40, 80, -80, 120, -120, -180};
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(pose(plan.steps[i]).yaw == yaws[i]);
        CHECK(pose(plan.steps[i]).pitch == 0.0);
        CHECK(pose(plan.steps[i]).fov == 80.0);
        CHECK(plan.steps[i].erase_fraction == 0.05);
        CHECK(plan.steps[i].risk_weights == RiskWeights{0.8, 0.2, 0, 0});
    }
    CHECK(plan.steps.back().role == StepRole::merge);
    CHECK(std::holds_alternative<MergeGuidance>(plan.steps.back().guidance));
    CHECK(plan.steps.back().sources.size() == 2);
}

TEST_CASE("full plan has five stages with their settings") {
    PipelineConfig c;
    c.task = Task::full;
    c.prompt = "x";
    const PathPlan plan = plan_paths(c);
    CHECK(plan.stages() ==
          std::vector<Stage>{Stage::center, Stage::expand_up, Stage::expand_down, Stage::pole_top, Stage::pole_bottom});
    for (const StepSpec& s : plan.steps) {
        const CameraPose p = pose(s);
        switch (s.stage) {
            case Stage::expand_up:
            case Stage::expand_down:
                CHECK(p.pitch == (s.stage == Stage::expand_up ? 25.0 : -25.0));
                CHECK(p.fov == 110.0);
                CHECK(s.sdedit.t0 == 0.90);
                CHECK(s.sdedit.guidance_scale == 2.0);
                CHECK(s.sdedit.variance_scale == 1.05);
                CHECK(s.erase_fraction == 0.10);
                CHECK(s.risk_weights == RiskWeights{0.6, 0.2, 0.1, 0.1});
                break;
            case Stage::pole_top:
            case Stage::pole_bottom:
                CHECK(std::abs(p.pitch) == 90.0);
                CHECK(p.fov == 90.0);
                CHECK(s.sdedit.t0 == 0.90);
                CHECK(s.sdedit.guidance_scale == 1.0);
                CHECK(s.sdedit.variance_scale == 1.1);
                CHECK(s.erase_fraction == 0.20);
                break;
            default:
                CHECK(p.fov == 80.0);
        }
    }
    // Per expansion direction: the initial view, then +80, -80 and the merge view.
    int up = 0;
    for (const StepSpec& s : plan.steps) up += s.stage == Stage::expand_up ? 1 : 0;
    CHECK(up == 4);
    CHECK(std::holds_alternative<PriorGuidance>(plan.find({Stage::expand_up, 0})->guidance));
    CHECK(std::get<PriorGuidance>(plan.find({Stage::expand_down, 0})->guidance).direction == PriorDirection::down);
}

TEST_CASE("symmetric guidance holds for every generated plan") {
    for (const Task task : {Task::planar, Task::pano360, Task::full}) {
        for (const int n : {1, 2, 3}) {
            PipelineConfig c = small_config(task);
            c.planar.steps_per_direction = n + 2;
            c.pano360.steps_per_direction = n;
            c.pano360.stride = 120.0 / n;
            c.pano360.fov = std::max(80.0, c.pano360.stride + 10.0);
            const PathPlan plan = plan_paths(c);
            std::set<ViewRef> done;
            for (const StepSpec& s : plan.steps) {
                if (s.role == StepRole::forward || s.role == StepRole::backward) {
                    const int i = std::abs(s.index) - 1;
                    const auto& g = std::get<ViewRef>(s.guidance);
                    CHECK(g.stage == s.stage);
                    CHECK(g.index == (s.index > 0 ? -i : i));
                    CHECK(done.count(g) == 1);
                }
                done.insert(s.ref());
            }
        }
    }
}

TEST_CASE("paths mirror each other") {
    for (const Task task : {Task::planar, Task::pano360, Task::full}) {
        const PathPlan plan = plan_paths(small_config(task));
        for (const StepSpec& s : plan.steps) {
            if (s.role != StepRole::forward) continue;
            const StepSpec* mirror = plan.find({s.stage, -s.index});
            REQUIRE(mirror != nullptr);
            if (const auto* p = std::get_if<PlanarPlacement>(&s.placement)) {
                const int origin = std::get<PlanarPlacement>(plan.find({s.stage, 0})->placement).x_offset;
                CHECK(p->x_offset - origin == origin - std::get<PlanarPlacement>(mirror->placement).x_offset);
            } else {
                CHECK(pose(s).yaw == -pose(*mirror).yaw);
                CHECK(pose(s).pitch == pose(*mirror).pitch);
            }
        }
    }
}

TEST_CASE("check_plan catches ordering bugs") {
    PathPlan plan = plan_paths(small_config(Task::pano360));
    std::swap(plan.steps[2], plan.steps[3]);
    CHECK_THROWS_AS(check_plan(plan), SequencingError);
    plan = plan_paths(small_config(Task::pano360));
    plan.steps[3].guidance = ViewRef{Stage::center, 1};
    CHECK_THROWS_AS(check_plan(plan), SequencingError);
}

TEST_CASE("configuration errors") {
    PipelineConfig c = small_config(Task::pano360);
    c.prompt.clear();
    CHECK_THROWS_WITH_AS(plan_paths(c), "prompt required", ConfigError);
    c = small_config(Task::pano360);
    c.pano360.stride = 90.0;
    CHECK_THROWS_AS(plan_paths(c), ConfigError);
    c = small_config(Task::pano360);
    c.pano360.steps_per_direction = 5;
    CHECK_THROWS_AS(plan_paths(c), ConfigError);
    c = small_config(Task::planar);
    c.planar.stride = 200.0;
    CHECK_THROWS_AS(plan_paths(c), ConfigError);
    c = small_config(Task::full);
    c.expansion.pitch = 95.0;
    CHECK_THROWS_AS(plan_paths(c), ConfigError);
}

TEST_CASE("select_symmetric_guidance") {
    const PipelineConfig c = small_config(Task::pano360);
    const PathPlan plan = plan_paths(c);
    PipelineState state = make_state(plan);
    const StepSpec& plus3 = *plan.find({Stage::center, 3});
    CHECK_THROWS_AS(select_symmetric_guidance(state, plus3), SequencingError);
    MockInpainter mock;
    for (const StepSpec& s : plan.steps) {
        if (s.ref() == plus3.ref()) break;
        run_step(state, plan, s, mock, c);
    }
    CHECK(&select_symmetric_guidance(state, plus3) == &state.views.at({Stage::center, -2}).image);
    CHECK(&select_symmetric_guidance(state, *plan.find({Stage::center, -3})) ==
          &state.views.at({Stage::center, 2}).image);
    CHECK(&select_symmetric_guidance(state, *plan.find({Stage::center, 1})) ==
          &state.views.at({Stage::center, 0}).image);
}

TEST_CASE("pipeline runs are deterministic") {
    for (const Task task : {Task::planar, Task::pano360}) {
        const PipelineConfig c = small_config(task);
        MockInpainter mock;
        const PipelineState a = run_pipeline(c, mock);
        const PipelineState b = run_pipeline(c, mock);
        CHECK(a.canvas == b.canvas);
        PipelineConfig other = c;
        other.seed += 1;
        CHECK_FALSE(run_pipeline(other, mock).canvas == a.canvas);
    }
}

TEST_CASE("running the same step twice from the same state is bit identical") {
    const PipelineConfig c = small_config(Task::pano360);
    const PathPlan plan = plan_paths(c);
    PipelineState state = make_state(plan);
    MockInpainter mock;
    for (int i = 0; i < 3; ++i) run_step(state, plan, plan.steps[i], mock, c);
    PipelineState a = state, b = state;
    run_step(a, plan, plan.steps[3], mock, c);
    run_step(b, plan, plan.steps[3], mock, c);
    CHECK(a.views.at(plan.steps[3].ref()).image == b.views.at(plan.steps[3].ref()).image);
    CHECK(a.canvas == b.canvas);
}

TEST_CASE("disabled mitigations reduce the mask to the geometric one") {
    for (const Task task : {Task::planar, Task::pano360}) {
        PipelineConfig c = small_config(task);
        c.planar.erase_fraction = 0.0;
        c.pano360.erase_fraction = 0.0;
        c.mask_filter.reset();
        const PathPlan plan = plan_paths(c);
        PipelineState state = make_state(plan);
        MockInpainter mock;
        for (const StepSpec& s : plan.steps) {
            const PreparedStep p = prepare_step(state, plan, s, c);
            REQUIRE(p.final_mask == p.geometric);
            REQUIRE(p.request.mask == p.geometric);
            run_step(state, plan, s, mock, c);
        }
    }
}

TEST_CASE("pano360 step +1 known fraction matches the rotation overlap oracle") {
    PipelineConfig c;
    c.prompt = "x";
    const PathPlan plan = plan_paths(c);
    PipelineState state = make_state(plan);
    MockInpainter mock;
    run_step(state, plan, plan.steps[0], mock, c);
    const PreparedStep p = prepare_step(state, plan, plan.steps[1], c);

    const OracleCamera src(0, 0, 80, 512, 512), dst(0, 40, 80, 512, 512);
    std::size_t hit = 0;
    for (int y = 0; y < 512; ++y)
        for (int x = 0; x < 512; ++x) {
            double d[3], u, v;
            dst.ray(x, y, d);
            if (src.project(d, u, v) && u >= 0 && u <= 511 && v >= 0 && v <= 511) ++hit;
        }
    const double oracle = hit / (512.0 * 512.0);
    CHECK(std::abs((1.0 - unknown_fraction(p.geometric)) - oracle) <= 0.005);
    CHECK(unknown_fraction(p.erased) > unknown_fraction(p.geometric));
}

TEST_CASE("merge view sees both path ends on its flanks") {
    const PipelineConfig c = small_config(Task::pano360);
    const PathPlan plan = plan_paths(c);
    PipelineState state = make_state(plan);
    MockInpainter mock;
    for (std::size_t i = 0; i + 1 < plan.steps.size(); ++i) run_step(state, plan, plan.steps[i], mock, c);
    const StepSpec& merge = plan.steps.back();
    const PreparedStep p = prepare_step(state, plan, merge, c);

    const int n = c.view_size;
    const OracleCamera m(0, 180, 80, n, n), left_end(0, -120, 80, n, n), right_end(0, 120, 80, n, n);
    std::size_t oracle_known = 0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double d[3], u, v;
            m.ray(x, y, d);
            bool seen = false;
            for (const OracleCamera* cam : {&left_end, &right_end})
                if (cam->project(d, u, v) && u >= 0 && u <= n - 1 && v >= 0 && v <= n - 1) seen = true;
            oracle_known += seen ? 1 : 0;
        }
    const double known = 1.0 - unknown_fraction(p.geometric);
    CHECK(std::abs(known - oracle_known / double(n * n)) <= 0.01);
    // Each flank is roughly 20 of the 80 degrees; the center column is unknown.
    const int mid = n / 2;
    CHECK(p.geometric.at(0, mid) == 0.0f);
    CHECK(p.geometric.at(n - 1, mid) == 0.0f);
    CHECK(p.geometric.at(mid, mid) == 1.0f);
}

TEST_CASE("constant paths merge into the same constant") {
    PipelineConfig c = small_config(Task::pano360);
    c.initial_image = panoweave::testing::constant_image({128, 128}, 0.25f, 0.5f, 0.75f);
    MockInpainter quiet(0.0);
    const PipelineState s = run_pipeline(c, quiet);
    const ViewImage& merged = s.views.at(plan_paths(c).steps.back().ref()).image;
    CHECK(merged == panoweave::testing::constant_image({128, 128}, 0.25f, 0.5f, 0.75f));
}

TEST_CASE("canvas knowledge is monotone and coverage is complete") {
    MockInpainter mock;
    const PipelineState s360 = run_pipeline(small_config(Task::pano360), mock);
    std::size_t last = 0;
    for (const auto& d : s360.diagnostics.steps) {
        CHECK(d.canvas_known >= last);
        last = d.canvas_known;
    }
    CHECK(band_coverage(s360.canvas, 36.0) == 1.0);
    CHECK(s360.diagnostics.warnings.empty());

    const PipelineState full = run_pipeline(small_config(Task::full), mock);
    CHECK(full.canvas.known_count() == full.canvas.size().area());
    last = 0;
    for (const auto& d : full.diagnostics.steps) {
        CHECK(d.canvas_known >= last);
        last = d.canvas_known;
    }
}

TEST_CASE("first upward expansion is guided by the upper third of the initial view") {
    const PipelineConfig c = small_config(Task::full);
    const PathPlan plan = plan_paths(c);
    PipelineState state = make_state(plan);
    MockInpainter mock;
    const StepSpec* up = plan.find({Stage::expand_up, 0});
    for (const StepSpec& s : plan.steps) {
        if (&s == up) break;
        run_step(state, plan, s, mock, c);
    }
    const PreparedStep p = prepare_step(state, plan, *up, c);
    CHECK(p.guide == extract_prior(state.views.at({Stage::center, 0}).image, 1.0 / 3.0, {128, 128}, PriorDirection::up));
}

TEST_CASE("merge of a fully known view is skipped with a warning") {
    const PipelineConfig c = small_config(Task::pano360);
    const PathPlan plan = plan_paths(c);
    MockInpainter mock;
    PipelineState state = run_pipeline(c, mock);
    const std::size_t steps = state.diagnostics.steps.size();
    state.canvas.mark_all_known();
    close_loop_merge(state, plan, plan.steps.back(), mock, c);
    CHECK(state.diagnostics.steps.size() == steps + 1);
    CHECK(state.diagnostics.steps.back().skipped);
    CHECK(state.diagnostics.warnings.size() == 1);
}

TEST_CASE("contract violations surface as nested step errors") {
    const PipelineConfig c = small_config(Task::pano360);
    SloppyInpainter sloppy;
    PipelineState state;
    try {
        run_pipeline(c, sloppy, state);
        FAIL("expected a step error");
    } catch (const StepError& e) {
        CHECK(e.step_label() == "center:+1");
        try {
            std::rethrow_if_nested(e);
        } catch (const ContractViolation&) {
            CHECK(true);
        } catch (...) {
            FAIL("wrong nested exception");
        }
    }
    CHECK(state.views.size() == 1);
}

TEST_CASE("diagnostics record every step") {
    MockInpainter mock;
    const PipelineConfig c = small_config(Task::planar);
    const PipelineState s = run_pipeline(c, mock);
    REQUIRE(s.diagnostics.steps.size() == 11);
    const auto& d = s.diagnostics.steps[1];
    CHECK(d.label == "planar:+1");
    CHECK(d.unknown_after_warp == doctest::Approx(0.5));
    CHECK(d.unknown_after_erase > d.unknown_after_warp);
    CHECK(d.unknown_final >= d.unknown_after_erase - 0.05);
    CHECK(d.seam_error >= 0.0);
}
