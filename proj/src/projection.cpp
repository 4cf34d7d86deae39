// SPDX-License-Identifier: Apache-2.0

#include "panoweave/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace panoweave {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Resampling coordinates this close to an integer are snapped, so identity
// warps copy exactly instead of picking up 1e-13 interpolation weights.
constexpr double kSnap = 1e-6;

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < kSnap ? r : v;
}

inline float lerp(float a, float b, float t) { return a + (b - a) * t; }

Vec3 frame_ray(const CameraFrame& f, double focal, Size view, double x, double y) {
    const double cx = (x + 0.5 - view.width / 2.0) / focal;
    const double cy = -(y + 0.5 - view.height / 2.0) / focal;
    return {f.forward[0] + cx * f.right[0] + cy * f.up[0], f.forward[1] + cx * f.right[1] + cy * f.up[1],
            f.forward[2] + cx * f.right[2] + cy * f.up[2]};
}

/// Bilinear sample at continuous pixel coordinates already known to lie in [0, w-1] x [0, h-1].
template <typename F>
void sample_bilinear(const F& src, double fx, double fy, float* out) {
    const int w = src.width();
    const int h = src.height();
    const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, h - 1);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const float tx = static_cast<float>(fx - x0);
    const float ty = static_cast<float>(fy - y0);
    const float* p00 = src.pixel(x0, y0);
    const float* p10 = src.pixel(x1, y0);
    const float* p01 = src.pixel(x0, y1);
    const float* p11 = src.pixel(x1, y1);
    for (int c = 0; c < F::channels; ++c) {
        if (tx == 0.0f && ty == 0.0f) {
            out[c] = p00[c];
            continue;
        }
        const float top = lerp(p00[c], p10[c], tx);
        const float bottom = lerp(p01[c], p11[c], tx);
        out[c] = lerp(top, bottom, ty);
    }
}

template <typename F>
Warped<F> shift_impl(const F& src, double dx) {
    if (!std::isfinite(dx) || std::abs(dx) > src.width())
        throw InvalidTranslation("translation " + std::to_string(dx) + " exceeds view width " +
                                 std::to_string(src.width()));
    Warped<F> out{F(src.size()), Mask(src.size(), 1.0f)};
    const int w = src.width();
    for (int x = 0; x < w; ++x) {
        const double sx = snap(x + dx);
        if (sx < 0.0 || sx > w - 1) continue;
        for (int y = 0; y < src.height(); ++y) {
            sample_bilinear(src, sx, y, out.image.pixel(x, y));
            out.unknown.at(x, y) = 0.0f;
        }
    }
    return out;
}

template <typename F>
Warped<F> rotate_impl(const F& src, const CameraPose& src_pose, const CameraPose& dst_pose) {
    validate(src_pose);
    validate(dst_pose);
    const Size size = src.size();
    const CameraFrame from(src_pose);
    const CameraFrame to(dst_pose);
    const double dst_focal = focal_length(dst_pose, size.width);
    const double src_focal = focal_length(src_pose, size.width);
    const double cx = size.width / 2.0 - 0.5;
    const double cy = size.height / 2.0 - 0.5;

    Warped<F> out{F(size), Mask(size, 1.0f)};
    for (int y = 0; y < size.height; ++y) {
        for (int x = 0; x < size.width; ++x) {
            const Vec3 ray = frame_ray(to, dst_focal, size, x, y);
            const double z = dot(ray, from.forward);
            if (z <= 0.0) continue;
            const double u = snap(src_focal * dot(ray, from.right) / z + cx);
            const double v = snap(-src_focal * dot(ray, from.up) / z + cy);
            if (u < 0.0 || u > size.width - 1 || v < 0.0 || v > size.height - 1) continue;
            sample_bilinear(src, u, v, out.image.pixel(x, y));
            out.unknown.at(x, y) = 0.0f;
        }
    }
    return out;
}

struct EquirectSample {
    int x0, x1, y0, y1;
    float tx, ty;
};

EquirectSample equirect_taps(double yaw, double pitch, int w, int h) {
    const double fx = (yaw + 180.0) / 360.0 * w - 0.5;
    const double fy = std::clamp((90.0 - pitch) / 180.0 * h - 0.5, 0.0, static_cast<double>(h - 1));
    const double fx0 = std::floor(fx);
    int x0 = static_cast<int>(fx0) % w;
    if (x0 < 0) x0 += w;
    const int y0 = std::min(static_cast<int>(std::floor(fy)), h - 1);
    return {x0, (x0 + 1) % w, y0, std::min(y0 + 1, h - 1), static_cast<float>(fx - fx0),
            static_cast<float>(fy - y0)};
}

/// View-space blend weight for overwriting already-known texels.
std::vector<float> overwrite_alpha(const CommitOptions& options, Size view) {
    std::vector<float> alpha(view.area(), options.policy == CommitPolicy::overwrite ? 1.0f : 0.0f);
    if (options.policy == CommitPolicy::overwrite || options.regenerated == nullptr) return alpha;
    const Mask& region = *options.regenerated;
    if (region.size() != view)
        throw DimensionError("commit regenerated mask: size mismatch " + to_string(region.size()) + " vs " +
                             to_string(view));
    for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = region.values()[i] >= 0.5f ? 1.0f : 0.0f;
    if (options.feather_width <= 0) return alpha;

    // Two-pass chamfer distance (in pixels) from each regenerated pixel to the nearest kept pixel.
    const float inf = std::numeric_limits<float>::max() / 4;
    const int w = view.width;
    const int h = view.height;
    std::vector<float> dist(alpha.size());
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = alpha[i] > 0.0f ? inf : 0.0f;
    auto at = [&](int x, int y) -> float& { return dist[static_cast<std::size_t>(y) * w + x]; };
    constexpr float kAxial = 1.0f;
    constexpr float kDiagonal = 1.41421356f;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float& d = at(x, y);
            if (x > 0) d = std::min(d, at(x - 1, y) + kAxial);
            if (y > 0) d = std::min(d, at(x, y - 1) + kAxial);
            if (x > 0 && y > 0) d = std::min(d, at(x - 1, y - 1) + kDiagonal);
            if (x + 1 < w && y > 0) d = std::min(d, at(x + 1, y - 1) + kDiagonal);
        }
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            float& d = at(x, y);
            if (x + 1 < w) d = std::min(d, at(x + 1, y) + kAxial);
            if (y + 1 < h) d = std::min(d, at(x, y + 1) + kAxial);
            if (x + 1 < w && y + 1 < h) d = std::min(d, at(x + 1, y + 1) + kDiagonal);
            if (x > 0 && y + 1 < h) d = std::min(d, at(x - 1, y + 1) + kDiagonal);
        }
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] > 0.0f) alpha[i] = std::min(1.0f, dist[i] / static_cast<float>(options.feather_width));
    return alpha;
}

float sample_plane(const std::vector<float>& plane, Size size, double u, double v) {
    const int x0 = std::clamp(static_cast<int>(std::floor(u)), 0, size.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(v)), 0, size.height - 1);
    const int x1 = std::min(x0 + 1, size.width - 1);
    const int y1 = std::min(y0 + 1, size.height - 1);
    const float tx = static_cast<float>(std::clamp(u - x0, 0.0, 1.0));
    const float ty = static_cast<float>(std::clamp(v - y0, 0.0, 1.0));
    auto p = [&](int x, int y) { return plane[static_cast<std::size_t>(y) * size.width + x]; };
    return lerp(lerp(p(x0, y0), p(x1, y0), tx), lerp(p(x0, y1), p(x1, y1), tx), ty);
}

/// Row range of an equirect canvas that can intersect the frustum.
std::pair<int, int> candidate_rows(const CameraPose& pose, Size view, int canvas_height) {
    const double tx = std::tan(pose.fov * kDeg / 2.0);
    const double ty = tx * view.height / view.width;
    const double half_diag = std::atan(std::sqrt(tx * tx + ty * ty)) / kDeg;
    const double top = std::min(90.0, pose.pitch + half_diag + 1.0);
    const double bottom = std::max(-90.0, pose.pitch - half_diag - 1.0);
    const int r0 = std::max(0, static_cast<int>(std::floor((90.0 - top) / 180.0 * canvas_height)) - 1);
    const int r1 = std::min(canvas_height - 1, static_cast<int>(std::ceil((90.0 - bottom) / 180.0 * canvas_height)) + 1);
    return {r0, r1};
}

/// Calls visit(x, y, u, v) for each canvas texel inside the frustum, with (u, v) the continuous
/// view coordinates clamped into the pixel grid.
template <typename Visit>
void for_each_frustum_texel(Size canvas, const CameraPose& pose, Size view, Visit&& visit) {
    validate(pose);
    const CameraFrame frame(pose);
    const double focal = focal_length(pose, view.width);
    const double tx = std::tan(pose.fov * kDeg / 2.0);
    const double ty = tx * view.height / view.width;
    const double cx = view.width / 2.0 - 0.5;
    const double cy = view.height / 2.0 - 0.5;

    std::vector<double> sin_yaw(canvas.width), cos_yaw(canvas.width);
    for (int c = 0; c < canvas.width; ++c) {
        const double yaw = canvas_column_yaw(c, canvas.width) * kDeg;
        sin_yaw[c] = std::sin(yaw);
        cos_yaw[c] = std::cos(yaw);
    }
    const auto [r0, r1] = candidate_rows(pose, view, canvas.height);
    for (int r = r0; r <= r1; ++r) {
        const double pitch = canvas_row_pitch(r, canvas.height) * kDeg;
        const double sp = std::sin(pitch);
        const double cp = std::cos(pitch);
        for (int c = 0; c < canvas.width; ++c) {
            const Vec3 d{cp * sin_yaw[c], sp, cp * cos_yaw[c]};
            const double z = dot(d, frame.forward);
            if (z <= 0.0) continue;
            const double x = dot(d, frame.right) / z;
            const double y = dot(d, frame.up) / z;
            if (std::abs(x) > tx || std::abs(y) > ty) continue;
            const double u = std::clamp(focal * x + cx, 0.0, view.width - 1.0);
            const double v = std::clamp(-focal * y + cy, 0.0, view.height - 1.0);
            visit(c, r, u, v);
        }
    }
}

struct CommitSources {
    const ViewImage& view;
    std::vector<float> alpha;
    std::vector<float> risk;
};

void write_texel(PanoCanvas& canvas, int c, int r, double u, double v, const CommitSources& src, Size view) {
    float rgb[3];
    sample_bilinear(src.view, u, v, rgb);
    const bool has_risk = !src.risk.empty();
    const float risk = has_risk ? sample_plane(src.risk, view, u, v) : 0.0f;
    float* dst = canvas.pixels().pixel(c, r);
    if (!canvas.known(c, r)) {
        std::copy(rgb, rgb + 3, dst);
        canvas.risk().at(c, r) = risk;
        canvas.set_known(c, r);
        return;
    }
    const float a = sample_plane(src.alpha, view, u, v);
    if (a <= 0.0f) return;
    if (a >= 1.0f) {
        std::copy(rgb, rgb + 3, dst);
        if (has_risk) canvas.risk().at(c, r) = risk;
        return;
    }
    for (int k = 0; k < 3; ++k) dst[k] = lerp(dst[k], rgb[k], a);
    if (has_risk) canvas.risk().at(c, r) = lerp(canvas.risk().at(c, r), risk, a);
}

CommitSources make_sources(const ViewImage& view, const CommitOptions& options) {
    CommitSources src{view, overwrite_alpha(options, view.size()), {}};
    if (options.risk != nullptr) {
        require_same_size(view, *options.risk, "commit risk");
        src.risk.assign(options.risk->values().begin(), options.risk->values().end());
    }
    return src;
}

}  // namespace

// ---------------------------------------------------------------------------

CameraFrame::CameraFrame(const CameraPose& pose) {
    const double p = pose.pitch * kDeg;
    const double y = pose.yaw * kDeg;
    const double sp = std::sin(p), cp = std::cos(p), sy = std::sin(y), cy = std::cos(y);
    forward = {cp * sy, sp, cp * cy};
    right = {cy, 0.0, -sy};
    up = {-sp * sy, cp, -sp * cy};
}

double focal_length(const CameraPose& pose, int width) { return (width / 2.0) / std::tan(pose.fov * kDeg / 2.0); }

Vec3 pixel_ray(const CameraPose& pose, Size view, double x, double y) {
    return frame_ray(CameraFrame(pose), focal_length(pose, view.width), view, x, y);
}

Vec3 direction_from_angles(double yaw, double pitch) {
    const double p = pitch * kDeg;
    const double y = yaw * kDeg;
    return {std::cos(p) * std::sin(y), std::sin(p), std::cos(p) * std::cos(y)};
}

std::array<double, 2> angles_from_direction(const Vec3& dir) {
    const double horizontal = std::hypot(dir[0], dir[2]);
    const double pitch = std::atan2(dir[1], horizontal) / kDeg;
    double yaw = std::atan2(dir[0], dir[2]) / kDeg;
    if (yaw >= 180.0) yaw -= 360.0;
    return {yaw, pitch};
}

WarpResult planar_shift_warp(const ViewImage& src, double dx) { return shift_impl(src, dx); }
Warped<RiskMap> planar_shift_warp(const RiskMap& src, double dx) { return shift_impl(src, dx); }

WarpResult rotate_warp(const ViewImage& src, const CameraPose& src_pose, const CameraPose& dst_pose) {
    return rotate_impl(src, src_pose, dst_pose);
}
Warped<RiskMap> rotate_warp(const RiskMap& src, const CameraPose& src_pose, const CameraPose& dst_pose) {
    return rotate_impl(src, src_pose, dst_pose);
}

RenderedView render_view(const PanoCanvas& canvas, const CameraPose& pose, Size size) {
    if (canvas.kind() != CanvasKind::equirect) throw UnsupportedKind("render_view needs an equirect canvas");
    validate(pose);
    RenderedView out{ViewImage(size), Mask(size), RiskMap(size)};
    const CameraFrame frame(pose);
    const double focal = focal_length(pose, size.width);
    const int w = canvas.width();
    const int h = canvas.height();
    const ViewImage& px = canvas.pixels();
    for (int y = 0; y < size.height; ++y) {
        for (int x = 0; x < size.width; ++x) {
            const auto [yaw, pitch] = angles_from_direction(frame_ray(frame, focal, size, x, y));
            const EquirectSample s = equirect_taps(yaw, pitch, w, h);
            if (!(canvas.known(s.x0, s.y0) && canvas.known(s.x1, s.y0) && canvas.known(s.x0, s.y1) &&
                  canvas.known(s.x1, s.y1)))
                continue;
            float* dst = out.image.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                const float top = lerp(px.at(s.x0, s.y0, c), px.at(s.x1, s.y0, c), s.tx);
                const float bottom = lerp(px.at(s.x0, s.y1, c), px.at(s.x1, s.y1, c), s.tx);
                dst[c] = lerp(top, bottom, s.ty);
            }
            const RiskMap& rk = canvas.risk();
            out.risk.at(x, y) = lerp(lerp(rk.at(s.x0, s.y0), rk.at(s.x1, s.y0), s.tx),
                                     lerp(rk.at(s.x0, s.y1), rk.at(s.x1, s.y1), s.tx), s.ty);
            out.known.at(x, y) = 1.0f;
        }
    }
    return out;
}

void commit_view(PanoCanvas& canvas, const ViewImage& view, const CameraPose& pose, const CommitOptions& options) {
    if (canvas.kind() != CanvasKind::equirect) throw UnsupportedKind("commit_view needs an equirect canvas");
    const CommitSources src = make_sources(view, options);
    for_each_frustum_texel(canvas.size(), pose, view.size(), [&](int c, int r, double u, double v) {
        write_texel(canvas, c, r, u, v, src, view.size());
    });
}

std::size_t frustum_footprint(Size canvas, const CameraPose& pose, Size view) {
    std::size_t n = 0;
    for_each_frustum_texel(canvas, pose, view, [&](int, int, double, double) { ++n; });
    return n;
}

RenderedView crop_planar(const PanoCanvas& canvas, int x_offset, Size size) {
    if (canvas.kind() != CanvasKind::planar) throw UnsupportedKind("crop_planar needs a planar canvas");
    if (size.height != canvas.height())
        throw DimensionError("planar view height " + std::to_string(size.height) + " differs from strip height " +
                             std::to_string(canvas.height()));
    RenderedView out{ViewImage(size), Mask(size), RiskMap(size)};
    for (int y = 0; y < size.height; ++y) {
        for (int x = 0; x < size.width; ++x) {
            const int cx = x_offset + x;
            if (cx < 0 || cx >= canvas.width() || !canvas.known(cx, y)) continue;
            std::copy_n(canvas.pixels().pixel(cx, y), 3, out.image.pixel(x, y));
            out.risk.at(x, y) = canvas.risk().at(cx, y);
            out.known.at(x, y) = 1.0f;
        }
    }
    return out;
}

void commit_planar(PanoCanvas& canvas, const ViewImage& view, int x_offset, const CommitOptions& options) {
    if (canvas.kind() != CanvasKind::planar) throw UnsupportedKind("commit_planar needs a planar canvas");
    if (view.height() != canvas.height())
        throw DimensionError("planar view height " + std::to_string(view.height()) + " differs from strip height " +
                             std::to_string(canvas.height()));
    const CommitSources src = make_sources(view, options);
    for (int y = 0; y < view.height(); ++y) {
        for (int x = 0; x < view.width(); ++x) {
            const int cx = x_offset + x;
            if (cx < 0 || cx >= canvas.width()) continue;
            write_texel(canvas, cx, y, x, y, src, view.size());
        }
    }
}

}  // namespace panoweave
