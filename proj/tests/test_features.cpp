// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "svol/errors.hpp"
#include "svol/features.hpp"

using namespace svol;

namespace {

FeatureMap random_map(oracle::Rng& rng, int c, int h, int w, double scale = 1.0) {
    std::vector<float> data(static_cast<std::size_t>(c) * h * w);
    for (float& v : data)
        v = static_cast<float>(rng.uniform(-1, 1));
    return FeatureMap(c, h, w, std::move(data), scale);
}

// Four-neighbor weighted sum at continuous feature coordinates, edges clamped.
std::vector<double> bilinear(const FeatureMap& m, double u, double v) {
    const double fu = (u + 0.5) * m.scale() - 0.5;
    const double fv = (v + 0.5) * m.scale() - 0.5;
    const int x0 = static_cast<int>(std::floor(fu));
    const int y0 = static_cast<int>(std::floor(fv));
    const double ax = fu - x0;
    const double ay = fv - y0;
    std::vector<double> out(m.channels(), 0.0);
    for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx) {
            const int x = std::clamp(x0 + dx, 0, m.width() - 1);
            const int y = std::clamp(y0 + dy, 0, m.height() - 1);
            const double w = (dx ? ax : 1 - ax) * (dy ? ay : 1 - ay);
            for (int c = 0; c < m.channels(); ++c)
                out[c] += w * m.at(c, y, x);
        }
    return out;
}

Camera front_camera(int w, int h) {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = k(1, 1) = w;
    k(0, 2) = 0.5 * (w - 1);
    k(1, 2) = 0.5 * (h - 1);
    return Camera::from_pinhole(k, Eigen::Matrix3d::Identity(), Vec3(0, 0, 2), w, h);
}

} // namespace

TEST_SUITE("features") {

TEST_CASE("sample_feature: constant map and exact pixel centers") {
    const Camera cam = front_camera(8, 6);
    const FeatureMap constant(2, 6, 8, std::vector<float>(96, 0.75f));
    const auto inside = sample_feature(constant, cam, Vec3(0.05, -0.03, 0.0));
    REQUIRE(inside);
    CHECK((*inside)[0] == doctest::Approx(0.75));
    CHECK((*inside)[1] == doctest::Approx(0.75));

    oracle::Rng rng(41);
    const FeatureMap m = random_map(rng, 3, 6, 8);
    const Vec3 p = cam.unproject(Vec2(5, 2), 2.0);
    const auto at_center = sample_feature(m, cam, p);
    REQUIRE(at_center);
    for (int c = 0; c < 3; ++c)
        CHECK((*at_center)[c] == doctest::Approx(m.at(c, 2, 5)).epsilon(1e-6));

    CHECK_FALSE(sample_feature(m, cam, Vec3(0, 0, -5)));
    CHECK_FALSE(sample_feature(m, cam, cam.unproject(Vec2(8.2, 2), 2.0)));
    CHECK_FALSE(sample_feature(m, cam, cam.unproject(Vec2(-0.6, 2), 2.0)));
}

TEST_CASE("sample_feature: agrees with the four-neighbor oracle, full and half resolution") {
    oracle::Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const Camera cam = oracle::random_camera(rng, Vec3::Zero(), 40, 30);
        const double scale = trial % 2 ? 1.0 : 0.5;
        const FeatureMap m = random_map(rng, 4, static_cast<int>(30 * scale), static_cast<int>(40 * scale), scale);
        for (int i = 0; i < 50; ++i) {
            const Vec3 p = rng.vec(-0.5, 0.5);
            const Projection proj = cam.project(p);
            const auto got = sample_feature(m, cam, p);
            if (!proj.in_image) {
                CHECK_FALSE(got);
                continue;
            }
            REQUIRE(got);
            const auto ref = bilinear(m, proj.pixel.x(), proj.pixel.y());
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs((*got)[c] - ref[c]) < 1e-6);
        }
    }
}

TEST_CASE("meanvar: hand cases") {
    using Opt = std::optional<std::vector<float>>;
    const std::vector<Opt> two{Opt(std::vector<float>{0.0f}), Opt(std::vector<float>{2.0f})};
    const AggregatedFeature a = meanvar(two, 1);
    CHECK(a.valid);
    CHECK(a.mean[0] == 1.0f);
    CHECK(a.variance[0] == 1.0f);
    CHECK(a.concatenated() == std::vector<float>{1.0f, 1.0f});

    const std::vector<Opt> same{Opt(std::vector<float>{0.5f, -2.0f}), Opt(std::vector<float>{0.5f, -2.0f}), std::nullopt, Opt(std::vector<float>{0.5f, -2.0f})};
    const AggregatedFeature b = meanvar(same, 2);
    CHECK(b.mean == std::vector<float>{0.5f, -2.0f});
    CHECK(b.variance == std::vector<float>{0.0f, 0.0f});

    const std::vector<Opt> one{Opt(std::vector<float>{3.0f})};
    CHECK(meanvar(one, 1).variance[0] == 0.0f);

    const std::vector<Opt> none{std::nullopt, std::nullopt};
    const AggregatedFeature z = meanvar(none, 3);
    CHECK_FALSE(z.valid);
    CHECK(z.concatenated() == std::vector<float>(6, 0.0f));
}

TEST_CASE("meanvar: permutation invariant, variance non-negative") {
    oracle::Rng rng(43);
    using Opt = std::optional<std::vector<float>>;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Opt> views;
        const int m = rng.integer(1, 8);
        for (int v = 0; v < m; ++v) {
            std::vector<float> f(5);
            // nearly equal values stress the variance guard
            for (float& x : f)
                x = static_cast<float>(1000.0 + rng.uniform(-1e-4, 1e-4));
            views.push_back(f);
        }
        const AggregatedFeature a = meanvar(views, 5);
        std::shuffle(views.begin(), views.end(), rng.engine());
        const AggregatedFeature b = meanvar(views, 5);
        for (int c = 0; c < 5; ++c) {
            CHECK(std::abs(a.mean[c] - b.mean[c]) <= 1e-6 * 1000);
            CHECK(std::abs(a.variance[c] - b.variance[c]) <= 1e-6);
            CHECK(a.variance[c] >= 0.0f);
        }
    }
}

TEST_CASE("build_dense_volume: constant maps, invisible voxels, loop oracle, duplication") {
    oracle::Rng rng(44);
    const GridSpec spec(BoundingBox(Vec3::Constant(-0.5), Vec3::Constant(0.5)), 4, 1);
    std::vector<Camera> cams;
    std::vector<FeatureMap> maps;
    for (int v = 0; v < 3; ++v) {
        cams.push_back(oracle::random_camera(rng, Vec3::Zero(), 24, 20));
        maps.push_back(random_map(rng, 2, 20, 24));
    }
    const DenseFeatureVolume vol = build_dense_volume(spec, maps, cams);
    CHECK(vol.channels == 4);
    for (std::int64_t i = 0; i < spec.coarse_count(); ++i) {
        const Vec3 p = voxel_center(spec, {Frame::Occupancy, spec.coarse_coord(i)});
        std::vector<std::optional<std::vector<float>>> views;
        for (int v = 0; v < 3; ++v)
            views.push_back(sample_feature(maps[v], cams[v], p));
        const AggregatedFeature ref = meanvar(views, 2);
        const auto got = vol.at(i);
        CHECK(static_cast<bool>(vol.visible[i]) == ref.valid);
        const auto cat = ref.concatenated();
        for (int c = 0; c < 4; ++c)
            CHECK(got[c] == cat[c]);
    }

    const std::vector<Camera> cams2{cams[0], cams[1], cams[2], cams[0], cams[1], cams[2]};
    const std::vector<FeatureMap> maps2{maps[0], maps[1], maps[2], maps[0], maps[1], maps[2]};
    const DenseFeatureVolume dup = build_dense_volume(spec, maps2, cams2);
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        CHECK(std::abs(dup.data[i] - vol.data[i]) < 1e-6);

    const std::vector<FeatureMap> flat{FeatureMap(2, 20, 24, std::vector<float>(960, 0.25f))};
    const std::vector<Camera> one{cams[0]};
    const DenseFeatureVolume c = build_dense_volume(spec, flat, one);
    for (std::int64_t i = 0; i < spec.coarse_count(); ++i) {
        const auto f = c.at(i);
        if (c.visible[i]) {
            CHECK(f[0] == doctest::Approx(0.25));
            CHECK(f[2] == 0.0f);
        } else {
            CHECK(f[0] == 0.0f);
        }
    }

    // a camera looking away sees nothing
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 2) = k(1, 2) = 2;
    const std::vector<Camera> away{Camera::from_pinhole(k, Eigen::Matrix3d::Identity(), Vec3(0, 0, -5), 5, 5)};
    const std::vector<FeatureMap> small{FeatureMap(2, 5, 5, std::vector<float>(50, 1.0f))};
    const DenseFeatureVolume blind = build_dense_volume(spec, small, away);
    CHECK(std::all_of(blind.data.begin(), blind.data.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("feature tensors split into per-view maps") {
    std::vector<float> data(2 * 3 * 2 * 4);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = static_cast<float>(i);
    const auto maps = feature_maps_from_tensor(Tensor::from<float>({2, 3, 2, 4}, data));
    REQUIRE(maps.size() == 2);
    CHECK(maps[1].at(0, 0, 0) == 24.0f);
    CHECK(maps[0].at(2, 1, 3) == 23.0f);
    CHECK_THROWS_AS(feature_maps_from_tensor(Tensor::from<float>({2, 12}, data)), DomainError);
    CHECK_THROWS_AS(FeatureMap(1, 1, 1, {1.0f}, 1.5), DomainError);
    CHECK_THROWS_AS(check_views(maps, std::vector<Camera>{}), DomainError);
}

} // TEST_SUITE
