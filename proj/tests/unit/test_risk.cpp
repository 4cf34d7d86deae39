// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "panoweave/risk.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace panoweave;
using namespace panoweave::testing;

namespace {

double max_diff(const RiskMap& got, const std::vector<double>& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got.values()[i] - want[i]));
    return worst;
}

bool in_unit_range(const RiskMap& r) { return all_finite_in_unit_range(r.values()); }

}  // namespace

TEST_CASE("risk edge matches the dense convolution oracle") {
    for (const auto& [size, band, sigma] : {std::tuple{64, 4, 8.0}, std::tuple{32, 3, 2.5}, std::tuple{48, 16, 16.0}}) {
        const RiskMap r = risk_edge({size, size}, band, sigma);
        CHECK(max_diff(r, oracle_risk_edge(size, size, band, sigma)) <= 1e-5);
        CHECK(in_unit_range(r));
    }
}

TEST_CASE("risk edge corner is maximal and center below every border pixel") {
    const RiskMap r = risk_edge({64, 64}, 4, 8.0);
    CHECK(r.at(0, 0) == 1.0f);
    float border_min = 1.0f;
    for (int i = 0; i < 64; ++i)
        border_min = std::min({border_min, r.at(i, 0), r.at(0, i), r.at(63, i), r.at(i, 63)});
    CHECK(r.at(32, 32) < border_min);
    CHECK_THROWS_AS(risk_edge({8, 8}, 0, 1.0), ParameterError);
    const RiskMap all = risk_edge({8, 8}, 4, 1.0);
    CHECK(std::all_of(all.values().begin(), all.values().end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("risk color matches the dense oracle") {
    const Size size{32, 32};
    const auto views = stat_views(size, 3);
    RowStats stats(size.height);
    for (const auto& v : views) stats = update_row_stats(stats, v);
    const RiskMap r = risk_color(views[1], stats, 4.0);
    CHECK(max_diff(r, oracle_risk_color(views, 1, 4.0)) <= 1e-5);
    CHECK(in_unit_range(r));
}

TEST_CASE("risk smooth matches the dense oracle") {
    const Size size{48, 40};
    const auto views = stat_views(size, 3);
    RowStats stats(size.height);
    for (const auto& v : views) stats.add_view(v);
    const RiskMap r = risk_smooth(views[2], stats, 4.0);
    CHECK(max_diff(r, oracle_risk_smooth(views, 2, 4.0)) <= 1e-5);
    CHECK(in_unit_range(r));
}

TEST_CASE("risk color and smooth degenerate cases") {
    const Size size{16, 16};
    ViewImage rows(size);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x)
            for (int c = 0; c < 3; ++c) rows.at(x, y, c) = y / 16.0f;
    RowStats stats(16);
    stats.add_view(rows);
    const RiskMap color = risk_color(rows, stats, 2.0);
    CHECK(std::all_of(color.values().begin(), color.values().end(), [](float v) { return v == 0.0f; }));

    const ViewImage flat = constant_image(size, 0.3f, 0.3f, 0.3f);
    RowStats flat_stats(16);
    flat_stats.add_view(flat);
    const RiskMap smooth = risk_smooth(flat, flat_stats, 2.0);
    CHECK(std::all_of(smooth.values().begin(), smooth.values().end(), [](float v) { return v == 0.0f; }));

    CHECK_THROWS_AS(risk_color(rows, RowStats(16), 2.0), MissingStats);
    CHECK_THROWS_AS(risk_smooth(rows, RowStats(), 2.0), MissingStats);
}

TEST_CASE("risk color peaks at an outlier") {
    const Size size{32, 32};
    ViewImage view = constant_image(size, 0.4f, 0.4f, 0.4f);
    RowStats stats(32);
    stats.add_view(view);
    view.at(20, 11, 0) = 1.0f;
    const RiskMap r = risk_color(view, stats, 2.0);
    const auto it = std::max_element(r.values().begin(), r.values().end());
    const auto idx = static_cast<int>(it - r.values().begin());
    CHECK(std::abs(idx % 32 - 20) <= 2);
    CHECK(std::abs(idx / 32 - 11) <= 2);
}

TEST_CASE("risk smooth peaks along a vertical step edge") {
    const Size size{32, 32};
    ViewImage view(size);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x)
            for (int c = 0; c < 3; ++c) view.at(x, y, c) = 1.0f;
    RowStats stats(32);
    stats.add_view(constant_image(size, 0.5f, 0.5f, 0.5f));
    const RiskMap r = risk_smooth(view, stats, 1.0);
    for (int y = 0; y < 32; ++y) {
        const float* row = &r.values()[static_cast<std::size_t>(y) * 32];
        const int arg = static_cast<int>(std::max_element(row, row + 32) - row);
        CHECK((arg == 15 || arg == 16));
    }
}

TEST_CASE("risk init extremes, symmetry and monotonicity") {
    const Size size{40, 30};
    const PanoCoords coords = planar_coords(size, 0.0);
    const RiskMap r = risk_init(coords, {20.0, 15.0}, {1.0, 0.0});
    CHECK(r.at(19, 10) == 0.0f);
    CHECK(r.at(0, 0) == 1.0f);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 20; ++x) CHECK(r.at(x, y) == r.at(39 - x, y));

    const AxisWeights w{1.0, 0.25};
    const RiskMap m = risk_init(planar_coords(size, 100.0), {70.0, 5.0}, w);
    std::vector<double> dist;
    for (const auto& p : planar_coords(size, 100.0).points)
        dist.push_back(std::sqrt((p.h - 70.0) * (p.h - 70.0) + 0.25 * (p.v - 5.0) * (p.v - 5.0)));
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, dist.size() - 1);
    for (int k = 0; k < 20000; ++k) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (dist[i] < dist[j]) REQUIRE(m.values()[i] <= m.values()[j]);
    }
    CHECK(in_unit_range(m));
    CHECK_THROWS_AS(risk_init(coords, {0, 0}, {0.0, 0.0}), ParameterError);
}

TEST_CASE("risk init on the sphere wraps yaw") {
    const Size size{64, 64};
    const CameraPose pose = make_pose(0, 170, 80);
    const RiskMap r = risk_init(spherical_coords(size, pose), {-170.0, 0.0}, {1.0, 0.25});
    // The origin lies 20 degrees to the right of the view center across the seam.
    CHECK(r.at(63, 32) < r.at(0, 32));
}

TEST_CASE("combine risks") {
    const Size size{8, 8};
    RiskMap a(size), b(size, 1.0f), z(size);
    for (std::size_t i = 0; i < a.pixel_count(); ++i) a.values()[i] = static_cast<float>(i) / 64.0f;
    CHECK(combine_risks({&a, &b, &b, &b}, {1, 0, 0, 0}) == a);
    CHECK(combine_risks({&z, &z, &z, &z}, {0.8, 0.2, 0, 0}) == z);
    const RiskMap mix = combine_risks({&a, &b, &z, &z}, {0.8, 0.2, 0, 0});
    CHECK(mix.at(4, 2) == doctest::Approx(0.8f * a.at(4, 2) + 0.2f));
    CHECK(combine_risks({&b, &b, &b, &b}, {1, 1, 1, 1}) == b);
    RiskMap small(4, 4);
    CHECK_THROWS_AS(combine_risks({&a, &small, &z, &z}, {1, 0, 0, 0}), DimensionError);
}

TEST_CASE("erase by risk equals the sort oracle") {
    const Size size{40, 40};
    for (const double f : {0.05, 0.10, 0.20, 0.30}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Mask mask = random_mask(size, seed, 0.3);
            const RiskMap risk = distinct_risk(size, seed + 100);
            REQUIRE(erase_by_risk(mask, risk, f) == oracle_erase(mask, risk, f));
        }
    }
}

TEST_CASE("erase by risk boundary fractions and ties") {
    const Size size{10, 10};
    const Mask mask = random_mask(size, 4, 0.4);
    const RiskMap risk = [&] {
        RiskMap r(size);
        for (std::size_t i = 0; i < r.pixel_count(); ++i) r.values()[i] = (i % 7) / 7.0f;
        return r;
    }();
    CHECK(erase_by_risk(mask, risk, 0.0) == mask);
    const Mask all = erase_by_risk(mask, risk, 1.0);
    CHECK(unknown_fraction(all) == 1.0);
    const Mask some = erase_by_risk(mask, risk, 0.3);
    for (std::size_t i = 0; i < mask.pixel_count(); ++i) CHECK(some.values()[i] >= mask.values()[i]);
    CHECK_THROWS_AS(erase_by_risk(mask, risk, 1.5), ParameterError);
    CHECK_THROWS_AS(erase_by_risk(mask, risk, -0.1), ParameterError);

    const RiskMap flat(size, 0.5f);
    CHECK(unknown_fraction(erase_by_risk(mask, flat, 0.1)) == 1.0);
}

TEST_CASE("filter mask fixed points and speck removal") {
    const Size size{24, 24};
    MaskFilterParams p;
    CHECK(filter_mask(Mask(size, 0.0f), p) == Mask(size, 0.0f));
    CHECK(filter_mask(Mask(size, 1.0f), p) == Mask(size, 1.0f));

    Mask speck(size);
    speck.at(12, 12) = 1.0f;
    p.median_radius = 1;
    CHECK(filter_mask(speck, p) == Mask(size));

    const Mask noisy = random_mask(size, 77);
    CHECK(is_binary(filter_mask(noisy, {})));
    CHECK_THROWS_AS(filter_mask(noisy, {0.0, 0.5, 1}), ParameterError);
}

TEST_CASE("filter mask shortens staircase boundaries") {
    for (const int step : {1, 2, 3}) {
        const Mask stair = staircase({48, 48}, step);
        const Mask out = filter_mask(stair, {2.0, 0.5, 2});
        CHECK(is_binary(out));
        CHECK(perimeter(out) < perimeter(stair));
    }
}
