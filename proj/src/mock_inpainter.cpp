// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "panoweave/backend.hpp"

namespace panoweave {

ViewImage mock_inpaint(const InpaintRequest& request, double sigma) {
    require_same_size(request.image, request.mask, "mock_inpaint");
    const int w = request.image.width();
    const int h = request.image.height();
    ViewImage out = request.image;

    std::vector<std::uint8_t> filled(out.pixel_count());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < filled.size(); ++i) {
        filled[i] = request.mask.values()[i] < 0.5f ? 1 : 0;
        if (!filled[i]) pending.push_back(i);
    }
    const std::vector<std::size_t> to_noise = pending;

    if (pending.size() == filled.size()) {
        out.fill(0.5f);
        pending.clear();
    }

    // Wavefront propagation: each pass fills the unknown pixels touching an
    // already filled one with the mean of their filled 3x3 neighbours.
    std::vector<std::size_t> layer;
    std::vector<std::array<float, 3>> layer_values;
    while (!pending.empty()) {
        layer.clear();
        layer_values.clear();
        std::vector<std::size_t> rest;
        for (std::size_t i : pending) {
            const int x = static_cast<int>(i % w);
            const int y = static_cast<int>(i / w);
            std::array<float, 3> sum{0.0f, 0.0f, 0.0f};
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (!filled[static_cast<std::size_t>(ny) * w + nx]) continue;
                    const float* p = out.pixel(nx, ny);
                    for (int c = 0; c < 3; ++c) sum[c] += p[c];
                    ++n;
                }
            if (n == 0) {
                rest.push_back(i);
                continue;
            }
            for (float& s : sum) s /= static_cast<float>(n);
            layer.push_back(i);
            layer_values.push_back(sum);
        }
        for (std::size_t k = 0; k < layer.size(); ++k) {
            std::copy(layer_values[k].begin(), layer_values[k].end(), out.values().begin() + layer[k] * 3);
            filled[layer[k]] = 1;
        }
        pending.swap(rest);
    }

    const double amplitude = sigma * request.sdedit.t0;
    std::mt19937_64 rng(request.sdedit.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i : to_noise) {
        float* p = out.values().data() + i * 3;
        for (int c = 0; c < 3; ++c) {
            const double n = amplitude > 0.0 ? amplitude * noise(rng) : 0.0;
            p[c] = static_cast<float>(std::clamp(p[c] + n, 0.0, 1.0));
        }
    }
    return out;
}

ViewImage InstrumentedInpainter::inpaint(const InpaintRequest& request) {
    const int now = ++in_flight_;
    int prev = max_in_flight_.load();
    while (now > prev && !max_in_flight_.compare_exchange_weak(prev, now)) {
    }
    ++calls_;
    const auto start = std::chrono::steady_clock::now();
    struct Leave {
        std::atomic<int>& counter;
        ~Leave() { --counter; }
    } leave{in_flight_};
    ViewImage out = inner_.inpaint(request);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    total_ms_.fetch_add(ms);
    return out;
}

}  // namespace panoweave
