// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panoweave/imagecore.hpp"

namespace panoweave {

// 8-bit PNG interchange. Images are RGB; masks and risk maps are grayscale
// where 255 maps to 1.0 (unknown, for masks). Channel values are quantized by
// rounding, so a round trip moves each value by at most 0.5/255.

std::vector<std::uint8_t> encode_png(const ViewImage& image);
std::vector<std::uint8_t> encode_png(const Mask& mask);
std::vector<std::uint8_t> encode_png(const RiskMap& risk);

/// Grayscale or RGB input is accepted; alpha is discarded.
ViewImage decode_png_image(std::span<const std::uint8_t> bytes);
Mask decode_png_mask(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const ViewImage& image);
void write_png(const std::filesystem::path& path, const Mask& mask);
void write_png(const std::filesystem::path& path, const RiskMap& risk);

ViewImage read_png_image(const std::filesystem::path& path);
Mask read_png_mask(const std::filesystem::path& path);

}  // namespace panoweave
