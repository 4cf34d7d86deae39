// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "panoweave/imagecore.hpp"

namespace panoweave::testing {

inline ViewImage random_image(Size size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    ViewImage img(size);
    for (float& v : img.values()) v = u(rng);
    return img;
}

inline Mask random_mask(Size size, std::uint64_t seed, double p_unknown = 0.5) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(p_unknown);
    Mask m(size);
    for (float& v : m.values()) v = b(rng) ? 1.0f : 0.0f;
    return m;
}

inline ViewImage constant_image(Size size, float r, float g, float b) {
    ViewImage img(size);
    for (int y = 0; y < size.height; ++y)
        for (int x = 0; x < size.width; ++x) {
            img.at(x, y, 0) = r;
            img.at(x, y, 1) = g;
            img.at(x, y, 2) = b;
        }
    return img;
}

/// Smooth color field on the sphere, periodic in yaw.
inline void sphere_texture(double yaw_deg, double pitch_deg, float* rgb) {
    const double y = yaw_deg * std::numbers::pi / 180.0;
    const double p = pitch_deg * std::numbers::pi / 180.0;
    rgb[0] = static_cast<float>(0.5 + 0.4 * std::sin(3.0 * y) * std::cos(p));
    rgb[1] = static_cast<float>(0.5 + 0.4 * std::cos(2.0 * p + y));
    rgb[2] = static_cast<float>(0.5 + 0.3 * std::sin(4.0 * p) * std::cos(2.0 * y));
}

/// Independent pinhole model: world ray of pixel center (x, y) built from
/// explicit yaw and pitch rotation matrices applied to the camera-space ray.
struct OracleCamera {
    double m[3][3];
    double focal;
    int width;
    int height;

    OracleCamera(double pitch_deg, double yaw_deg, double fov_deg, int w, int h) : width(w), height(h) {
        const double p = pitch_deg * std::numbers::pi / 180.0;
        const double y = yaw_deg * std::numbers::pi / 180.0;
        // Ry(yaw) * Rx(-pitch), camera looks along +z with +y up.
        const double rx[3][3] = {{1, 0, 0}, {0, std::cos(p), std::sin(p)}, {0, -std::sin(p), std::cos(p)}};
        const double ry[3][3] = {{std::cos(y), 0, std::sin(y)}, {0, 1, 0}, {-std::sin(y), 0, std::cos(y)}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                m[i][j] = 0;
                for (int k = 0; k < 3; ++k) m[i][j] += ry[i][k] * rx[k][j];
            }
        focal = (w / 2.0) / std::tan(fov_deg * std::numbers::pi / 360.0);
    }

    void ray(double px, double py, double out[3]) const {
        const double c[3] = {px + 0.5 - width / 2.0, -(py + 0.5 - height / 2.0), focal};
        for (int i = 0; i < 3; ++i) out[i] = m[i][0] * c[0] + m[i][1] * c[1] + m[i][2] * c[2];
    }

    /// Continuous pixel coordinates of a world direction; false when behind the camera.
    bool project(const double d[3], double& u, double& v) const {
        double c[3];
        for (int i = 0; i < 3; ++i) c[i] = m[0][i] * d[0] + m[1][i] * d[1] + m[2][i] * d[2];
        if (c[2] <= 0) return false;
        u = focal * c[0] / c[2] + width / 2.0 - 0.5;
        v = -focal * c[1] / c[2] + height / 2.0 - 0.5;
        return true;
    }
};

inline double pitch_of(const double d[3]) {
    return std::atan2(d[1], std::hypot(d[0], d[2])) * 180.0 / std::numbers::pi;
}

}  // namespace panoweave::testing
