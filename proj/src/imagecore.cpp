// SPDX-License-Identifier: Apache-2.0

#include "panoweave/imagecore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace panoweave {

std::string to_string(Size size) { return std::to_string(size.width) + "x" + std::to_string(size.height); }

bool is_binary(const Mask& mask) {
    return std::all_of(mask.values().begin(), mask.values().end(), [](float v) { return v == 0.0f || v == 1.0f; });
}

bool all_finite_in_unit_range(std::span<const float> values) {
    return std::all_of(values.begin(), values.end(),
                       [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

double unknown_fraction(const Mask& mask) {
    if (mask.empty()) return 0.0;
    auto n = std::count_if(mask.values().begin(), mask.values().end(), [](float v) { return v >= 0.5f; });
    return static_cast<double>(n) / static_cast<double>(mask.pixel_count());
}

Mask invert(const Mask& mask) {
    Mask out = mask;
    for (float& v : out.values()) v = 1.0f - v;
    return out;
}

Mask pixelwise_max(const Mask& a, const Mask& b) {
    require_same_size(a, b, "pixelwise_max");
    Mask out = a;
    auto src = b.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::max(dst[i], src[i]);
    return out;
}

std::vector<float> gradient_magnitude(const ViewImage& image) {
    const int w = image.width();
    const int h = image.height();
    std::vector<float> lum(image.pixel_count());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) lum[static_cast<std::size_t>(y) * w + x] = luminance(image.pixel(x, y));

    std::vector<float> out(lum.size());
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const float gx = 0.5f * (lum[static_cast<std::size_t>(y) * w + xp] - lum[static_cast<std::size_t>(y) * w + xm]);
            const float gy = 0.5f * (lum[static_cast<std::size_t>(yp) * w + x] - lum[static_cast<std::size_t>(ym) * w + x]);
            out[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

void minmax_normalize(std::span<float> values) {
    if (values.empty()) return;
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const float lo = *lo_it;
    const float hi = *hi_it;
    if (!(hi > lo)) {
        std::fill(values.begin(), values.end(), 0.0f);
        return;
    }
    const double scale = 1.0 / (static_cast<double>(hi) - lo);
    for (float& v : values) v = static_cast<float>((static_cast<double>(v) - lo) * scale);
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += taps[i + radius];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

std::vector<float> gaussian_blur(std::span<const float> plane, Size size, double sigma) {
    if (plane.size() != size.area()) throw DimensionError("gaussian_blur: plane does not match size " + to_string(size));
    std::vector<float> out(plane.begin(), plane.end());
    if (sigma <= 0.0) return out;

    const auto taps = gaussian_kernel(sigma);
    const int radius = static_cast<int>(taps.size() / 2);
    const int w = size.width;
    const int h = size.height;

    std::vector<double> tmp(plane.size());
    for (int y = 0; y < h; ++y) {
        const float* row = plane.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * row[std::clamp(x + k, 0, w - 1)];
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[k + radius] * tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
            out[static_cast<std::size_t>(y) * w + x] = static_cast<float>(acc);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

double wrap_degrees(double angle) {
    double a = std::fmod(angle + 180.0, 360.0);
    if (a < 0.0) a += 360.0;
    return a - 180.0;
}

void validate(const CameraPose& pose) {
    if (!std::isfinite(pose.pitch) || pose.pitch < -90.0 || pose.pitch > 90.0)
        throw ParameterError("pitch must lie in [-90, 90], got " + std::to_string(pose.pitch));
    if (!std::isfinite(pose.yaw) || pose.yaw < -180.0 || pose.yaw >= 180.0)
        throw ParameterError("yaw must lie in [-180, 180), got " + std::to_string(pose.yaw));
    if (!std::isfinite(pose.fov) || pose.fov <= 0.0 || pose.fov >= 180.0)
        throw ParameterError("fov must lie in (0, 180), got " + std::to_string(pose.fov));
}

CameraPose make_pose(double pitch, double yaw, double fov) {
    CameraPose pose{pitch, wrap_degrees(yaw), fov};
    validate(pose);
    return pose;
}

const char* to_string(CanvasKind kind) { return kind == CanvasKind::planar ? "planar" : "equirect"; }

PanoCanvas::PanoCanvas(CanvasKind kind, int width, int height)
    : kind_(kind), pixels_(width, height), risk_(width, height), known_(static_cast<std::size_t>(width) * height, 0) {}

std::size_t PanoCanvas::known_count() const {
    return static_cast<std::size_t>(std::count(known_.begin(), known_.end(), std::uint8_t{1}));
}

void PanoCanvas::mark_all_known() { std::fill(known_.begin(), known_.end(), std::uint8_t{1}); }

double canvas_column_yaw(int column, int width) { return -180.0 + (column + 0.5) * 360.0 / width; }
double canvas_row_pitch(int row, int height) { return 90.0 - (row + 0.5) * 180.0 / height; }

// ---------------------------------------------------------------------------

RowStats::RowStats(int rows) {
    if (rows <= 0) throw DimensionError("RowStats needs at least one row");
    color_sum_.assign(static_cast<std::size_t>(rows) * 3, 0.0);
    gradient_sum_.assign(rows, 0.0);
    counts_.assign(rows, 0);
}

bool RowStats::empty() const {
    return counts_.empty() || std::any_of(counts_.begin(), counts_.end(), [](std::uint64_t c) { return c == 0; });
}

void RowStats::add_view(const ViewImage& view) {
    if (view.height() != rows())
        throw DimensionError("RowStats: view height " + std::to_string(view.height()) + " does not match " +
                             std::to_string(rows()) + " rows");
    const auto grad = gradient_magnitude(view);
    const int w = view.width();
    for (int y = 0; y < view.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            const float* p = view.pixel(x, y);
            for (int c = 0; c < 3; ++c) color_sum_[static_cast<std::size_t>(y) * 3 + c] += p[c];
            gradient_sum_[y] += grad[static_cast<std::size_t>(y) * w + x];
        }
        counts_[y] += static_cast<std::uint64_t>(w);
    }
}

std::array<float, 3> RowStats::mean_color(int row) const {
    const double n = static_cast<double>(counts_[row]);
    if (n == 0) return {0.0f, 0.0f, 0.0f};
    return {static_cast<float>(color_sum_[row * 3] / n), static_cast<float>(color_sum_[row * 3 + 1] / n),
            static_cast<float>(color_sum_[row * 3 + 2] / n)};
}

float RowStats::mean_gradient(int row) const {
    const double n = static_cast<double>(counts_[row]);
    return n == 0 ? 0.0f : static_cast<float>(gradient_sum_[row] / n);
}

}  // namespace panoweave
