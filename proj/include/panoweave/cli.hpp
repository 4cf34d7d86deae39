// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "panoweave/pipeline.hpp"

namespace panoweave::cli {

struct BackendConfig {
    std::string kind = "mock";  ///< "mock" or "remote"
    std::string endpoint;
    double timeout_s = 600.0;
    double mock_sigma = 0.02;

    bool operator==(const BackendConfig&) const = default;
};

/// Everything needed to reproduce a run. Defaults match the published
/// configurations for each task.
struct RunConfig {
    PipelineConfig pipeline;
    BackendConfig backend;
    std::string output_dir = "panoweave_out";
    bool dump_diagnostics = false;
    std::string init_image;  ///< optional PNG used as view 0
};

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_invalid_config = 2,
    exit_backend_unreachable = 3,
    exit_contract_violation = 4,
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays `doc` onto `base`. Unknown keys and wrong types raise ConfigError
/// naming the JSON path (e.g. "config.pano360.fov: expected a number").
RunConfig apply_json(const nlohmann::json& doc, RunConfig base = {});

/// Validates everything except the presence of a prompt.
void validate_shape(const RunConfig& config);

nlohmann::json diagnostics_json(const PathPlan& plan, const PipelineState& state, const InstrumentedInpainter* backend);

/// Runs the command line front end. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace panoweave::cli
