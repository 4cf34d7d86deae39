// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panoweave/errors.hpp"

namespace panoweave {

struct Size {
    int width = 0;
    int height = 0;

    std::size_t area() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    bool operator==(const Size&) const = default;
};

std::string to_string(Size size);

/// Dense row-major float raster with a fixed channel count. The tag keeps
/// masks, risk maps and images from being mixed up at call sites.
template <int Channels, typename Tag>
class Field {
public:
    static constexpr int channels = Channels;

    Field() = default;

    Field(int width, int height, float fill = 0.0f) : width_(width), height_(height) {
        if (width <= 0 || height <= 0) {
            throw DimensionError("field dimensions must be positive, got " + std::to_string(width) + "x" +
                                 std::to_string(height));
        }
        data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
    }

    explicit Field(Size size, float fill = 0.0f) : Field(size.width, size.height, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Size size() const noexcept { return {width_, height_}; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    float& at(int x, int y, int c = 0) { return data_[index(x, y) + c]; }
    float at(int x, int y, int c = 0) const { return data_[index(x, y) + c]; }

    float* pixel(int x, int y) { return data_.data() + index(x, y); }
    const float* pixel(int x, int y) const { return data_.data() + index(x, y); }

    std::span<float> values() noexcept { return data_; }
    std::span<const float> values() const noexcept { return data_; }

    void fill(float value) { std::fill(data_.begin(), data_.end(), value); }

    bool operator==(const Field&) const = default;

private:
    std::size_t index(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)) * Channels;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

struct ImageTag {};
struct MaskTag {};
struct RiskTag {};

/// RGB, each channel in [0,1]. Values are normalized 8-bit code values; no transfer curve is applied.
using ViewImage = Field<3, ImageTag>;
/// 1 = unknown / to inpaint, 0 = known / keep.
using Mask = Field<1, MaskTag>;
using RiskMap = Field<1, RiskTag>;

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(what) + ": size mismatch " + to_string(a.size()) + " vs " +
                             to_string(b.size()));
    }
}

bool is_binary(const Mask& mask);
bool all_finite_in_unit_range(std::span<const float> values);
/// Fraction of pixels with mask value >= 0.5.
double unknown_fraction(const Mask& mask);
Mask invert(const Mask& mask);
Mask pixelwise_max(const Mask& a, const Mask& b);

/// Luminance with Rec.601 weights.
inline float luminance(const float* rgb) { return 0.299f * rgb[0] + 0.587f * rgb[1] + 0.114f * rgb[2]; }

/// Central-difference luminance gradient magnitude; border pixels use clamped neighbours.
std::vector<float> gradient_magnitude(const ViewImage& image);

/// Min-max normalize into [0,1]. A constant field maps to all zeros.
void minmax_normalize(std::span<float> values);

/// Separable Gaussian blur of a single-channel plane, clamp-to-edge borders,
/// kernel radius ceil(3 sigma). sigma <= 0 is a no-op.
std::vector<float> gaussian_blur(std::span<const float> plane, Size size, double sigma);

/// Normalized 1D Gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

// ---------------------------------------------------------------------------
// Camera poses and the panorama canvas.

/// Perspective view on the sphere. Roll is always zero.
struct CameraPose {
    double pitch = 0.0;  ///< degrees, [-90, 90], positive up
    double yaw = 0.0;    ///< degrees, [-180, 180), positive to the right
    double fov = 80.0;   ///< horizontal = vertical field of view of a square view, degrees, (0, 180)

    bool operator==(const CameraPose&) const = default;
};

/// Wraps yaw into [-180, 180) and validates pitch/fov.
CameraPose make_pose(double pitch, double yaw, double fov);
void validate(const CameraPose& pose);
double wrap_degrees(double angle);

enum class CanvasKind { planar, equirect };

const char* to_string(CanvasKind kind);

/// The accumulating panorama. Alongside colors it keeps a known flag and the
/// combined risk of whatever view wrote each texel.
///
/// For an equirect canvas, column c spans yaw [-180 + c*360/W, -180 + (c+1)*360/W)
/// and row r spans pitch [90 - r*180/H, 90 - (r+1)*180/H].
class PanoCanvas {
public:
    PanoCanvas() = default;
    PanoCanvas(CanvasKind kind, int width, int height);

    CanvasKind kind() const noexcept { return kind_; }
    int width() const noexcept { return pixels_.width(); }
    int height() const noexcept { return pixels_.height(); }
    Size size() const noexcept { return pixels_.size(); }

    ViewImage& pixels() noexcept { return pixels_; }
    const ViewImage& pixels() const noexcept { return pixels_; }
    RiskMap& risk() noexcept { return risk_; }
    const RiskMap& risk() const noexcept { return risk_; }

    bool known(int x, int y) const { return known_[static_cast<std::size_t>(y) * width() + x] != 0; }
    void set_known(int x, int y, bool value = true) {
        known_[static_cast<std::size_t>(y) * width() + x] = value ? 1 : 0;
    }
    std::span<const std::uint8_t> known_flags() const noexcept { return known_; }
    std::size_t known_count() const;

    /// Marks every texel known (test fixtures).
    void mark_all_known();

    bool operator==(const PanoCanvas&) const = default;

private:
    CanvasKind kind_ = CanvasKind::equirect;
    ViewImage pixels_;
    RiskMap risk_;
    std::vector<std::uint8_t> known_;
};

/// Texel center of an equirect canvas in degrees.
double canvas_column_yaw(int column, int width);
double canvas_row_pitch(int row, int height);

// ---------------------------------------------------------------------------

/// Per-row running means over every view seen so far at one pitch.
class RowStats {
public:
    RowStats() = default;
    explicit RowStats(int rows);

    int rows() const noexcept { return static_cast<int>(counts_.size()); }
    /// True when some row has no samples.
    bool empty() const;

    void add_view(const ViewImage& view);

    std::array<float, 3> mean_color(int row) const;
    float mean_gradient(int row) const;
    std::uint64_t count(int row) const { return counts_[row]; }

private:
    std::vector<double> color_sum_;
    std::vector<double> gradient_sum_;
    std::vector<std::uint64_t> counts_;
};

}  // namespace panoweave
