// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "panoweave/imagecore.hpp"

namespace panoweave {

/// A field resampled into another view plus the pixels that had no source.
/// Pixels under unknown = 1 are zero-filled.
template <typename F>
struct Warped {
    F image;
    Mask unknown;
};

using WarpResult = Warped<ViewImage>;

// ---------------------------------------------------------------------------
// Camera geometry

using Vec3 = std::array<double, 3>;

/// Orthonormal camera frame in world coordinates (x right, y up, z forward at yaw = pitch = 0).
struct CameraFrame {
    Vec3 right;
    Vec3 up;
    Vec3 forward;

    explicit CameraFrame(const CameraPose& pose);
};

/// Focal length in pixels for a view of the given width.
double focal_length(const CameraPose& pose, int width);

/// World ray through the center of view pixel (x, y). Not normalized.
Vec3 pixel_ray(const CameraPose& pose, Size view, double x, double y);

/// Unit world direction for (yaw, pitch) in degrees.
Vec3 direction_from_angles(double yaw, double pitch);
/// (yaw, pitch) in degrees of a world direction.
std::array<double, 2> angles_from_direction(const Vec3& dir);

// ---------------------------------------------------------------------------
// Warps

/// Translates content by dx pixels: out(x, y) = src(x + dx, y). Positive dx moves the camera right.
WarpResult planar_shift_warp(const ViewImage& src, double dx);
Warped<RiskMap> planar_shift_warp(const RiskMap& src, double dx);

/// Reprojects src (seen from src_pose) into dst_pose by pure rotation.
WarpResult rotate_warp(const ViewImage& src, const CameraPose& src_pose, const CameraPose& dst_pose);
Warped<RiskMap> rotate_warp(const RiskMap& src, const CameraPose& src_pose, const CameraPose& dst_pose);

// ---------------------------------------------------------------------------
// Canvas access

struct RenderedView {
    ViewImage image;  ///< zero where not known
    Mask known;       ///< 1 = every bilinear tap was a known texel
    RiskMap risk;     ///< canvas risk plane, zero where not known
};

/// Perspective render from an equirect canvas.
RenderedView render_view(const PanoCanvas& canvas, const CameraPose& pose, Size size);

enum class CommitPolicy { first_write_wins, overwrite };

struct CommitOptions {
    CommitPolicy policy = CommitPolicy::first_write_wins;
    /// Optional view-space mask of regenerated pixels. Under first_write_wins,
    /// already-known texels that sample this mask as 1 are overwritten anyway.
    const Mask* regenerated = nullptr;
    /// Width in view pixels of a linear ramp into the regenerated region; 0 = hard edge.
    int feather_width = 0;
    /// Optional risk of the view, written into the canvas risk plane.
    const RiskMap* risk = nullptr;
};

/// Writes every canvas texel whose direction lies inside the view frustum.
void commit_view(PanoCanvas& canvas, const ViewImage& view, const CameraPose& pose,
                 const CommitOptions& options = {});

/// Planar strip access: a view occupies columns [x_offset, x_offset + width).
RenderedView crop_planar(const PanoCanvas& canvas, int x_offset, Size size);
void commit_planar(PanoCanvas& canvas, const ViewImage& view, int x_offset, const CommitOptions& options = {});

/// Texels of an equirect canvas whose direction falls in the pose's frustum (no writes).
std::size_t frustum_footprint(Size canvas, const CameraPose& pose, Size view);

}  // namespace panoweave
