// SPDX-License-Identifier: Apache-2.0

#include "panoweave/guidance.hpp"

#include <algorithm>
#include <cmath>

namespace panoweave {

void validate(const SdeditParams& p) {
    if (!(p.t0 >= 0.0 && p.t0 < 1.0)) throw ParameterError("t0 must lie in [0, 1), got " + std::to_string(p.t0));
    if (!(p.guidance_scale >= 0.0) || !std::isfinite(p.guidance_scale))
        throw ParameterError("guidance_scale must be >= 0");
    if (!(p.variance_scale > 0.0) || !std::isfinite(p.variance_scale))
        throw ParameterError("variance_scale must be > 0");
    if (p.steps < 1) throw ParameterError("steps must be >= 1");
}

ViewImage paste_guidance(const ViewImage& warped, const Mask& mask, const ViewImage& guide) {
    require_same_size(warped, mask, "paste_guidance");
    require_same_size(warped, guide, "paste_guidance");
    ViewImage out(warped.size());
    for (int y = 0; y < warped.height(); ++y)
        for (int x = 0; x < warped.width(); ++x) {
            const float m = mask.at(x, y);
            const float* w = warped.pixel(x, y);
            const float* g = guide.pixel(x, y);
            float* o = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) o[c] = m * g[c] + (1.0f - m) * w[c];
        }
    return out;
}

ViewImage resize_bilinear(const ViewImage& src, Size target) {
    ViewImage out(target);
    const double sx = static_cast<double>(src.width()) / target.width;
    const double sy = static_cast<double>(src.height()) / target.height;
    auto lerp = [](float a, float b, float t) { return a + (b - a) * t; };
    for (int y = 0; y < target.height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const float ty = static_cast<float>(fy - y0);
        for (int x = 0; x < target.width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const float tx = static_cast<float>(fx - x0);
            float* o = out.pixel(x, y);
            for (int c = 0; c < 3; ++c)
                o[c] = lerp(lerp(src.at(x0, y0, c), src.at(x1, y0, c), tx),
                            lerp(src.at(x0, y1, c), src.at(x1, y1, c), tx), ty);
        }
    }
    return out;
}

ViewImage extract_prior(const ViewImage& initial, double fraction, Size target, PriorDirection direction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ParameterError("prior fraction must lie in (0, 1], got " + std::to_string(fraction));
    const int rows = static_cast<int>(std::floor(fraction * initial.height()));
    if (rows < 1) throw ParameterError("prior fraction selects no rows");
    const int first = direction == PriorDirection::up ? 0 : initial.height() - rows;
    ViewImage crop(initial.width(), rows);
    for (int y = 0; y < rows; ++y)
        std::copy_n(initial.pixel(0, first + y), static_cast<std::size_t>(initial.width()) * 3, crop.pixel(0, y));
    if (crop.size() == target) return crop;
    return resize_bilinear(crop, target);
}

InpaintRequest build_inpaint_request(ViewImage composed, Mask mask, std::string prompt, const SdeditParams& params,
                                     std::optional<std::string> negative_prompt) {
    validate(params);
    require_same_size(composed, mask, "build_inpaint_request");
    if (!is_binary(mask)) throw ParameterError("inpaint mask must be binary");
    return {std::move(composed), std::move(mask), std::move(prompt), std::move(negative_prompt), params};
}

}  // namespace panoweave
