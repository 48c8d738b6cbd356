// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Geometry>

#include "oracles.hpp"
#include "svol/errors.hpp"
#include "svol/fusion.hpp"
#include "temp_dir.hpp"

using namespace svol;

namespace {

Camera looking_down_z(int w, int h, double f) {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = k(1, 1) = f;
    k(0, 2) = 0.5 * (w - 1);
    k(1, 2) = 0.5 * (h - 1);
    return Camera::from_pinhole(k, Eigen::Matrix3d::Identity(), Vec3::Zero(), w, h);
}

DepthMap random_depth(oracle::Rng& rng, int w, int h, double lo, double hi) {
    DepthMap d(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform() > 0.1)
                d.set(x, y, static_cast<float>(rng.uniform(lo, hi)));
    return d;
}

TsdfVolume sphere_sdf(int resolution, double radius) {
    TsdfVolume vol(BoundingBox(Vec3::Constant(-1), Vec3::Constant(1)), resolution, 10.0);
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
            for (int k = 0; k < resolution; ++k)
                vol.set(vol.index(i, j, k), vol.center(i, j, k).norm() - radius, 1.0f);
    return vol;
}

} // namespace

TEST_SUITE("fusion") {

TEST_CASE("integrate: a fronto-parallel plane crosses zero at its depth") {
    const Camera cam = looking_down_z(64, 64, 64);
    DepthMap d(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            d.set(x, y, 1.0f);
    TsdfVolume vol(BoundingBox(Vec3(-0.2, -0.2, 0.5), Vec3(0.2, 0.2, 1.5)), 32, 0.1);
    integrate(vol, d, cam);
    const double edge = vol.voxel_edge().z();
    for (int i : {4, 16, 27}) {
        for (int j : {3, 15}) {
            int crossings = 0;
            for (int k = 0; k + 1 < 32; ++k) {
                const double a = vol.tsdf(vol.index(i, j, k));
                const double b = vol.tsdf(vol.index(i, j, k + 1));
                if (vol.weight(vol.index(i, j, k)) == 0 || vol.weight(vol.index(i, j, k + 1)) == 0)
                    continue;
                if ((a > 0) != (b > 0)) {
                    ++crossings;
                    const double z = vol.center(i, j, k).z() + edge * a / (a - b);
                    CHECK(std::abs(z - 1.0) <= 0.5 * edge);
                }
            }
            CHECK(crossings == 1);
        }
    }
    // behind the surface beyond the truncation band nothing is written
    CHECK(vol.weight(vol.index(16, 16, 31)) == 0.0f);
    CHECK(vol.tsdf(vol.index(16, 16, 31)) == 1.0);
    CHECK(vol.tsdf(vol.index(16, 16, 0)) == 1.0);
    CHECK(vol.weight(vol.index(16, 16, 0)) == 1.0f);
}

TEST_CASE("integrate: naive oracle, repeated maps, order invariance") {
    oracle::Rng rng(81);
    const BoundingBox box(Vec3(-0.5, -0.4, -0.3), Vec3(0.5, 0.4, 0.3));
    std::vector<Camera> cams;
    std::vector<DepthMap> maps;
    for (int v = 0; v < 4; ++v) {
        const Camera c = oracle::random_camera(rng, Vec3::Zero(), 24, 18);
        const double dist = (c.center()).norm();
        cams.push_back(c);
        maps.push_back(random_depth(rng, 24, 18, dist - 0.4, dist + 0.4));
    }
    TsdfVolume fast(box, Index3(20, 16, 12), 0.08);
    TsdfVolume slow(box, Index3(20, 16, 12), 0.08);
    for (int v = 0; v < 4; ++v) {
        integrate(fast, maps[v], cams[v]);
        oracle::integrate(slow, maps[v], cams[v]);
    }
    int weight_mismatch = 0;
    double tsdf_diff = 0.0;
    for (std::int64_t i = 0; i < fast.voxel_count(); ++i) {
        weight_mismatch += fast.weight(i) != slow.weight(i);
        tsdf_diff = std::max(tsdf_diff, std::abs(fast.tsdf(i) - slow.tsdf(i)));
    }
    CHECK(weight_mismatch == 0);
    CHECK(tsdf_diff <= 1e-12);

    TsdfVolume once(box, 10, 0.08), twice(box, 10, 0.08);
    integrate(once, maps[0], cams[0]);
    integrate(twice, maps[0], cams[0]);
    integrate(twice, maps[0], cams[0]);
    for (std::int64_t i = 0; i < once.voxel_count(); ++i) {
        CHECK(twice.tsdf(i) == doctest::Approx(once.tsdf(i)).epsilon(1e-12));
        CHECK(twice.weight(i) == 2 * once.weight(i));
    }

    TsdfVolume reversed(box, Index3(20, 16, 12), 0.08);
    for (int v = 3; v >= 0; --v)
        integrate(reversed, maps[v], cams[v]);
    double worst = 0.0;
    for (std::int64_t i = 0; i < fast.voxel_count(); ++i) {
        worst = std::max(worst, std::abs(fast.tsdf(i) - reversed.tsdf(i)));
        CHECK(fast.weight(i) == reversed.weight(i));
    }
    CHECK(worst <= 1e-9);

    CHECK(TsdfVolume(box, 10).truncation() == doctest::Approx(2 * 0.1));
}

TEST_CASE("virtual_view: shifts along the camera x axis") {
    oracle::Rng rng(82);
    for (int trial = 0; trial < 20; ++trial) {
        const Camera cam = oracle::random_camera(rng, Vec3::Zero(), 32, 24);
        CHECK((virtual_view(cam, 0.0).projection() - cam.projection()).norm() == 0.0);
        const Vec3 x_axis = cam.decompose().rotation.row(0).transpose();
        const Camera moved = virtual_view(cam, 0.025);
        CHECK((moved.center() - cam.center() - 0.025 * x_axis).norm() <= 1e-9);
        CHECK((moved.decompose().intrinsics - cam.decompose().intrinsics).norm() <= 1e-9);
        CHECK((moved.principal_axis() - cam.principal_axis()).norm() <= 1e-9);
        const Camera halves = virtual_view(virtual_view(cam, 0.0125), 0.0125);
        CHECK((halves.center() - moved.center()).norm() <= 1e-9);
        CHECK((halves.projection() - moved.projection()).norm() <= 1e-9 * moved.projection().norm());
    }
}

TEST_CASE("marching cubes: analytic sphere at 32^3") {
    const double radius = 0.6;
    const TsdfVolume vol = sphere_sdf(32, radius);
    const TriangleMesh mesh = marching_cubes(vol);
    REQUIRE(!mesh.faces.empty());
    const double edge = vol.voxel_edge().x();
    double worst_radius = 0.0, worst_iso = 0.0;
    for (const Vec3& v : mesh.vertices) {
        worst_radius = std::max(worst_radius, std::abs(v.norm() - radius));
        worst_iso = std::max(worst_iso, std::abs(vol.tsdf_at(v)));
    }
    CHECK(worst_radius <= edge);
    CHECK(worst_iso <= 1e-6);
    CHECK(count_boundary_or_nonmanifold_edges(mesh) == 0);
    REQUIRE(mesh.normals.size() == mesh.vertices.size());
    // outward winding: the positive side is outside the sphere
    int outward = 0;
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        outward += mesh.normals[i].dot(mesh.vertices[i]) > 0;
    CHECK(outward == static_cast<int>(mesh.vertices.size()));
}

TEST_CASE("marching cubes: trivial cases") {
    TsdfVolume cube(BoundingBox(Vec3::Zero(), Vec3::Constant(2)), 2, 1.0);
    for (std::int64_t i = 0; i < 8; ++i)
        cube.set(i, 0.5, 1.0f);
    CHECK(marching_cubes(cube).faces.empty());

    cube.set(cube.index(0, 0, 0), -0.5, 1.0f);
    const TriangleMesh one = marching_cubes(cube);
    REQUIRE(one.faces.size() == 1);
    REQUIRE(one.vertices.size() == 3);
    const Face& f = one.faces[0];
    const Vec3 n = (one.vertices[f[1]] - one.vertices[f[0]]).cross(one.vertices[f[2]] - one.vertices[f[0]]);
    CHECK(n.dot(Vec3(1, 1, 1)) > 0);
    for (const Vec3& v : one.vertices)
        CHECK(v.sum() == doctest::Approx(2.0));

    // a weight-0 corner suppresses the cell
    cube.set(cube.index(1, 1, 1), 0.5, 0.0f);
    CHECK(marching_cubes(cube).faces.empty());
    CHECK(marching_cubes(TsdfVolume(BoundingBox(Vec3::Zero(), Vec3::Ones()), 8)).faces.empty());
}

TEST_CASE("marching cubes: table uses exactly the edges with a sign change") {
    const auto& table = marching_cubes_table();
    CHECK(table[0].empty());
    CHECK(table[255].empty());
    for (int mask = 0; mask < 256; ++mask) {
        std::set<int> crossed, used;
        for (int e = 0; e < 12; ++e) {
            const bool a = mask >> kCubeEdges[e][0] & 1;
            const bool b = mask >> kCubeEdges[e][1] & 1;
            if (a != b)
                crossed.insert(e);
        }
        for (const auto& tri : table[mask])
            for (int e : tri)
                used.insert(e);
        CHECK(used == crossed);
    }
}

TEST_CASE("tsdf files round trip at f32 precision") {
    TempDir dir;
    oracle::Rng rng(83);
    TsdfVolume vol(BoundingBox(Vec3(-1, 0, 0.5), Vec3(1, 1, 1.5)), Index3(6, 5, 4), 0.07);
    for (std::int64_t i = 0; i < vol.voxel_count(); ++i)
        vol.set(i, rng.uniform(-1, 1), static_cast<float>(rng.integer(0, 5)));
    write_tsdf(dir / "v.svt", vol);
    const TsdfVolume back = read_tsdf(dir / "v.svt");
    CHECK(back.bbox() == vol.bbox());
    CHECK(back.resolution() == vol.resolution());
    CHECK(back.truncation() == vol.truncation());
    for (std::int64_t i = 0; i < vol.voxel_count(); ++i) {
        CHECK(back.tsdf(i) == static_cast<double>(static_cast<float>(vol.tsdf(i))));
        CHECK(back.weight(i) == vol.weight(i));
    }
    write_tensor(dir / "bad.svt", Tensor::from<float>({3, 2}, std::vector<float>(6)));
    CHECK_THROWS(read_tsdf(dir / "bad.svt"));
}

} // TEST_SUITE
