// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "panoweave/imagecore.hpp"

namespace panoweave {

/// Weights of the initial-distance, edge, color and smoothness risks.
struct RiskWeights {
    double init = 1.0;
    double edge = 0.0;
    double color = 0.0;
    double smooth = 0.0;

    bool operator==(const RiskWeights&) const = default;
};

void validate(const RiskWeights& weights);

/// Horizontal/vertical weights of the distance to the path origin.
struct AxisWeights {
    double horizontal = 1.0;
    double vertical = 0.25;

    bool operator==(const AxisWeights&) const = default;
};

struct PanoPoint {
    double h = 0.0;
    double v = 0.0;
};

/// Panorama coordinates of every pixel of one view. For spherical views h is yaw
/// and v is pitch in degrees and horizontal differences wrap with period 360.
struct PanoCoords {
    Size size;
    std::vector<PanoPoint> points;
    double wrap_period = 0.0;  ///< 0 = no wrap
};

/// Pixel-center coordinates of a planar view placed at x_offset in the strip.
PanoCoords planar_coords(Size view, double x_offset);
/// (yaw, pitch) of each pixel ray of a spherical view.
PanoCoords spherical_coords(Size view, const CameraPose& pose);

struct MaskFilterParams {
    double gauss_sigma = 2.0;
    double gauss_threshold = 0.5;
    int median_radius = 2;

    bool operator==(const MaskFilterParams&) const = default;
};

void validate(const MaskFilterParams& params);

/// Weighted distance to the path origin, min-max normalized within the view.
RiskMap risk_init(const PanoCoords& coords, PanoPoint path_origin, AxisWeights weights);

/// Blurred border-band indicator, normalized.
RiskMap risk_edge(Size view, int band, double sigma);

RowStats update_row_stats(RowStats stats, const ViewImage& view);

/// Blur(normalize(|color - row mean color|)).
RiskMap risk_color(const ViewImage& view, const RowStats& stats, double sigma);
/// Blur(normalize(|gradient magnitude - row mean gradient|)).
RiskMap risk_smooth(const ViewImage& view, const RowStats& stats, double sigma);

/// Weighted sum of init/edge/color/smooth, clamped to [0,1].
RiskMap combine_risks(const std::array<const RiskMap*, 4>& risks, const RiskWeights& weights);

/// Flips the top `fraction` of known pixels (by risk) to unknown. Ties at the
/// threshold are all erased, so the erased count can exceed round(fraction * known).
Mask erase_by_risk(const Mask& mask, const RiskMap& warped_risk, double fraction);

/// Gaussian blur, threshold, then binary median filter.
Mask filter_mask(const Mask& mask, const MaskFilterParams& params);

}  // namespace panoweave
