// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "panoweave/imagecore.hpp"

namespace panoweave {

/// Parameters forwarded to the inpainting backend. The backend owns the noise
/// schedule; t0 is the SDEdit start time and variance_scale multiplies the
/// variance of the initial noise.
struct SdeditParams {
    double t0 = 0.98;
    double guidance_scale = 7.5;
    double variance_scale = 1.0;
    int steps = 50;
    std::uint64_t seed = 0;

    bool operator==(const SdeditParams&) const = default;
};

void validate(const SdeditParams& params);

struct InpaintRequest {
    ViewImage image;  ///< composed guidance input
    Mask mask;        ///< 1 = inpaint
    std::string prompt;
    std::optional<std::string> negative_prompt;
    SdeditParams sdedit;
};

/// mask * guide + (1 - mask) * warped, per pixel.
ViewImage paste_guidance(const ViewImage& warped, const Mask& mask, const ViewImage& guide);

enum class PriorDirection { up, down };

/// Crops the top (or bottom) floor(fraction * height) rows of the initial view
/// and resizes them bilinearly to `target`.
ViewImage extract_prior(const ViewImage& initial, double fraction, Size target,
                        PriorDirection direction = PriorDirection::up);

/// Bilinear resize with pixel-center alignment.
ViewImage resize_bilinear(const ViewImage& src, Size target);

/// Bundles the fields unchanged after validating them.
InpaintRequest build_inpaint_request(ViewImage composed, Mask mask, std::string prompt, const SdeditParams& params,
                                     std::optional<std::string> negative_prompt = std::nullopt);

}  // namespace panoweave
