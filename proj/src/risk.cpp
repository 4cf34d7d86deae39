// SPDX-License-Identifier: Apache-2.0

#include "panoweave/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "panoweave/projection.hpp"

namespace panoweave {
namespace {

void require_stats(const ViewImage& view, const RowStats& stats) {
    if (stats.rows() == 0 || stats.empty()) throw MissingStats("row statistics missing for some rows");
    if (stats.rows() != view.height())
        throw DimensionError("row statistics cover " + std::to_string(stats.rows()) + " rows, view has " +
                             std::to_string(view.height()));
}

RiskMap blurred_normalized(std::vector<float> field, Size size, double sigma) {
    minmax_normalize(field);
    RiskMap out(size);
    const auto blurred = gaussian_blur(field, size, sigma);
    std::transform(blurred.begin(), blurred.end(), out.values().begin(),
                   [](float v) { return std::clamp(v, 0.0f, 1.0f); });
    return out;
}

}  // namespace

void validate(const RiskWeights& w) {
    for (double v : {w.init, w.edge, w.color, w.smooth})
        if (!std::isfinite(v) || v < 0.0) throw ParameterError("risk weights must be finite and >= 0");
}

void validate(const MaskFilterParams& p) {
    if (!(p.gauss_sigma > 0.0)) throw ParameterError("mask filter sigma must be > 0");
    if (!(p.gauss_threshold > 0.0 && p.gauss_threshold < 1.0))
        throw ParameterError("mask filter threshold must lie in (0, 1)");
    if (p.median_radius < 0) throw ParameterError("median radius must be >= 0");
}

PanoCoords planar_coords(Size view, double x_offset) {
    PanoCoords out{view, {}, 0.0};
    out.points.reserve(view.area());
    for (int y = 0; y < view.height; ++y)
        for (int x = 0; x < view.width; ++x) out.points.push_back({x_offset + x + 0.5, y + 0.5});
    return out;
}

PanoCoords spherical_coords(Size view, const CameraPose& pose) {
    validate(pose);
    PanoCoords out{view, {}, 360.0};
    out.points.reserve(view.area());
    for (int y = 0; y < view.height; ++y)
        for (int x = 0; x < view.width; ++x) {
            const auto [yaw, pitch] = angles_from_direction(pixel_ray(pose, view, x, y));
            out.points.push_back({yaw, pitch});
        }
    return out;
}

RiskMap risk_init(const PanoCoords& coords, PanoPoint origin, AxisWeights weights) {
    if (!(weights.horizontal >= 0.0 && weights.vertical >= 0.0) || (weights.horizontal == 0.0 && weights.vertical == 0.0))
        throw ParameterError("axis weights must be >= 0 and not both zero");
    if (coords.points.size() != coords.size.area()) throw DimensionError("risk_init: coordinate count mismatch");
    RiskMap out(coords.size);
    auto values = out.values();
    for (std::size_t i = 0; i < coords.points.size(); ++i) {
        double dh = coords.points[i].h - origin.h;
        if (coords.wrap_period > 0.0) {
            dh = std::remainder(dh, coords.wrap_period);
        }
        const double dv = coords.points[i].v - origin.v;
        values[i] = static_cast<float>(std::sqrt(weights.horizontal * dh * dh + weights.vertical * dv * dv));
    }
    minmax_normalize(values);
    return out;
}

RiskMap risk_edge(Size view, int band, double sigma) {
    if (band < 1) throw ParameterError("edge band must be >= 1");
    std::vector<float> indicator(view.area(), 0.0f);
    for (int y = 0; y < view.height; ++y)
        for (int x = 0; x < view.width; ++x) {
            const int d = std::min({x, y, view.width - 1 - x, view.height - 1 - y});
            if (d < band) indicator[static_cast<std::size_t>(y) * view.width + x] = 1.0f;
        }
    auto blurred = gaussian_blur(indicator, view, sigma);
    minmax_normalize(blurred);
    RiskMap out(view);
    std::copy(blurred.begin(), blurred.end(), out.values().begin());
    return out;
}

RowStats update_row_stats(RowStats stats, const ViewImage& view) {
    stats.add_view(view);
    return stats;
}

RiskMap risk_color(const ViewImage& view, const RowStats& stats, double sigma) {
    require_stats(view, stats);
    std::vector<float> dist(view.pixel_count());
    for (int y = 0; y < view.height(); ++y) {
        const auto mean = stats.mean_color(y);
        for (int x = 0; x < view.width(); ++x) {
            const float* p = view.pixel(x, y);
            const float dr = p[0] - mean[0], dg = p[1] - mean[1], db = p[2] - mean[2];
            dist[static_cast<std::size_t>(y) * view.width() + x] = std::sqrt(dr * dr + dg * dg + db * db);
        }
    }
    return blurred_normalized(std::move(dist), view.size(), sigma);
}

RiskMap risk_smooth(const ViewImage& view, const RowStats& stats, double sigma) {
    require_stats(view, stats);
    auto grad = gradient_magnitude(view);
    for (int y = 0; y < view.height(); ++y) {
        const float mean = stats.mean_gradient(y);
        for (int x = 0; x < view.width(); ++x) {
            float& g = grad[static_cast<std::size_t>(y) * view.width() + x];
            g = std::abs(g - mean);
        }
    }
    return blurred_normalized(std::move(grad), view.size(), sigma);
}

RiskMap combine_risks(const std::array<const RiskMap*, 4>& risks, const RiskWeights& weights) {
    validate(weights);
    for (const RiskMap* r : risks)
        if (r == nullptr) throw ParameterError("combine_risks: missing risk map");
    for (const RiskMap* r : risks) require_same_size(*risks[0], *r, "combine_risks");
    const double w[4] = {weights.init, weights.edge, weights.color, weights.smooth};
    RiskMap out(risks[0]->size());
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k)
            if (w[k] != 0.0) acc += w[k] * risks[k]->values()[i];
        dst[i] = static_cast<float>(std::clamp(acc, 0.0, 1.0));
    }
    return out;
}

Mask erase_by_risk(const Mask& mask, const RiskMap& warped_risk, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw ParameterError("erase fraction must lie in [0, 1], got " + std::to_string(fraction));
    require_same_size(mask, warped_risk, "erase_by_risk");
    Mask out = mask;
    std::vector<float> known_risks;
    for (std::size_t i = 0; i < mask.pixel_count(); ++i)
        if (mask.values()[i] < 0.5f) known_risks.push_back(warped_risk.values()[i]);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(known_risks.size())));
    if (count == 0) return out;

    std::nth_element(known_risks.begin(), known_risks.begin() + (count - 1), known_risks.end(), std::greater<>());
    const float threshold = known_risks[count - 1];
    for (std::size_t i = 0; i < mask.pixel_count(); ++i)
        if (mask.values()[i] < 0.5f && warped_risk.values()[i] >= threshold) out.values()[i] = 1.0f;
    return out;
}

Mask filter_mask(const Mask& mask, const MaskFilterParams& params) {
    validate(params);
    const Size size = mask.size();
    const auto blurred = gaussian_blur(mask.values(), size, params.gauss_sigma);

    std::vector<std::uint8_t> bin(blurred.size());
    std::transform(blurred.begin(), blurred.end(), bin.begin(),
                   [&](float v) { return static_cast<std::uint8_t>(v >= params.gauss_threshold ? 1 : 0); });

    Mask out(size);
    const int r = params.median_radius;
    if (r == 0) {
        std::transform(bin.begin(), bin.end(), out.values().begin(), [](std::uint8_t b) { return float(b); });
        return out;
    }

    // Binary median = majority vote over the (2r+1)^2 window, clamped borders.
    // Column sums along y are computed once, then slid along x.
    const int w = size.width;
    const int h = size.height;
    const int window = (2 * r + 1) * (2 * r + 1);
    std::vector<int> column(static_cast<std::size_t>(w));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int s = 0;
            for (int k = -r; k <= r; ++k) s += bin[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
            column[x] = s;
        }
        for (int x = 0; x < w; ++x) {
            int s = 0;
            for (int k = -r; k <= r; ++k) s += column[std::clamp(x + k, 0, w - 1)];
            out.at(x, y) = 2 * s > window ? 1.0f : 0.0f;
        }
    }
    return out;
}

}  // namespace panoweave
