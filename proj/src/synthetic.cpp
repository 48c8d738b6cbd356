// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "svol/errors.hpp"

namespace svol {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

Camera look_at_camera(const Vec3& eye, const Vec3& target, int width, int height, double fit_radius) {
    const Vec3 z = (target - eye).normalized();
    Vec3 up(0, 0, 1);
    if (std::abs(z.dot(up)) > 0.99)
        up = Vec3(0, 1, 0);
    const Vec3 x = z.cross(up).normalized();
    const Vec3 y = z.cross(x);
    Eigen::Matrix3d r;
    r.row(0) = x.transpose();
    r.row(1) = y.transpose();
    r.row(2) = z.transpose();
    const double dist = (target - eye).norm();
    if (!(dist > fit_radius))
        throw DomainError("camera must sit outside the sphere it frames");
    // half-angle subtended by the sphere, with a 10% margin
    const double half = std::asin(fit_radius / dist) * 1.1;
    const double f = 0.5 * std::min(width, height) / std::tan(half);
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = f;
    k(1, 1) = f;
    k(0, 2) = 0.5 * (width - 1);
    k(1, 2) = 0.5 * (height - 1);
    return Camera::from_pinhole(k, r, -r * eye, width, height);
}

SphereScene make_sphere_scene(const SphereSceneOptions& o) {
    const Vec3 center = Vec3::Zero();
    SphereScene scene{BoundingBox(Vec3::Constant(-o.box_half_extent), Vec3::Constant(o.box_half_extent)), center,
                      o.radius, {}};
    std::vector<Vec3> dirs;
    if (o.views == 8) {
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1})
                    dirs.push_back(Vec3(sx, sy, sz).normalized());
    } else {
        for (int v = 0; v < o.views; ++v) {
            const double phi = 2.0 * std::numbers::pi * v / o.views;
            const double elev = (v % 2 == 0) ? 0.4 : -0.4;
            dirs.push_back(Vec3(std::cos(phi) * std::cos(elev), std::sin(phi) * std::cos(elev), std::sin(elev)));
        }
    }
    for (const Vec3& d : dirs)
        scene.cameras.push_back(
            look_at_camera(center + o.camera_distance * d, center, o.image_size, o.image_size, o.radius));
    return scene;
}

DepthMap render_sphere_depth(const Camera& camera, const Vec3& center, double radius) {
    DepthMap depth(camera.width(), camera.height());
    const Vec3 axis = camera.principal_axis();
    for (int y = 0; y < camera.height(); ++y) {
        for (int x = 0; x < camera.width(); ++x) {
            const Ray ray = camera.pixel_ray(Vec2(x, y));
            const Vec3 oc = ray.origin() - center;
            const double b = ray.direction().dot(oc);
            const double disc = b * b - (oc.squaredNorm() - radius * radius);
            if (disc < 0.0)
                continue;
            const double t = -b - std::sqrt(disc);
            if (t <= 0.0)
                continue;
            depth.set(x, y, static_cast<float>(t * ray.direction().dot(axis)));
        }
    }
    return depth;
}

std::vector<Vec3> sample_sphere(const Vec3& center, double radius, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Vec3> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double z = 2.0 * unit(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out.push_back(center + radius * Vec3(r * std::cos(phi), r * std::sin(phi), z));
    }
    return out;
}

TriangleMesh sphere_mesh(const Vec3& center, double radius, int rings, int segments) {
    if (rings < 2 || segments < 3)
        throw DomainError("sphere mesh needs at least 2 rings and 3 segments");
    TriangleMesh mesh;
    mesh.vertices.push_back(center + Vec3(0, 0, radius));
    for (int i = 1; i < rings; ++i) {
        const double theta = std::numbers::pi * i / rings;
        for (int j = 0; j < segments; ++j) {
            const double phi = 2.0 * std::numbers::pi * j / segments;
            mesh.vertices.push_back(center + radius * Vec3(std::sin(theta) * std::cos(phi),
                                                           std::sin(theta) * std::sin(phi), std::cos(theta)));
        }
    }
    mesh.vertices.push_back(center - Vec3(0, 0, radius));
    const auto south = static_cast<std::int32_t>(mesh.vertices.size() - 1);
    auto ring = [segments](int i, int j) { return static_cast<std::int32_t>(1 + (i - 1) * segments + (j % segments)); };
    for (int j = 0; j < segments; ++j)
        mesh.faces.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int i = 1; i + 1 < rings; ++i) {
        for (int j = 0; j < segments; ++j) {
            mesh.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            mesh.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    for (int j = 0; j < segments; ++j)
        mesh.faces.push_back({ring(rings - 1, j), south, ring(rings - 1, j + 1)});
    for (const Vec3& v : mesh.vertices)
        mesh.normals.push_back((v - center).normalized());
    return mesh;
}

OccupancyField sphere_shell_occupancy(const GridSpec& spec, const Vec3& center, double radius) {
    std::vector<std::uint8_t> occ(spec.coarse_count(), 0);
    const Vec3 edge = spec.coarse_edge();
    for (std::int64_t i = 0; i < spec.coarse_count(); ++i) {
        const Vec3 lo = spec.bbox().min_corner() + spec.coarse_coord(i).cast<double>().cwiseProduct(edge);
        const Vec3 hi = lo + edge;
        const double near = (center.cwiseMax(lo).cwiseMin(hi) - center).norm();
        double far = 0.0;
        for (int c = 0; c < 8; ++c) {
            const Vec3 corner((c & 4) ? hi.x() : lo.x(), (c & 2) ? hi.y() : lo.y(), (c & 1) ? hi.z() : lo.z());
            far = std::max(far, (corner - center).norm());
        }
        occ[i] = (near <= radius && far >= radius) ? 1 : 0;
    }
    return OccupancyField::binary(spec, std::move(occ));
}

Tensor sphere_logits(const GridSpec& spec, const Vec3& center, double radius, double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double scale = spec.coarse_edge().maxCoeff();
    std::vector<float> logits(spec.coarse_count());
    for (std::int64_t i = 0; i < spec.coarse_count(); ++i) {
        const Vec3 p = voxel_center(spec, {Frame::Occupancy, spec.coarse_coord(i)});
        const double d = std::abs((p - center).norm() - radius) / scale;
        logits[i] = static_cast<float>(4.0 - 6.0 * d + noise * (2.0 * unit(rng) - 1.0));
    }
    const Index3 k = spec.coarse_resolution();
    return Tensor::from<float>(
        {static_cast<std::uint64_t>(k.x()), static_cast<std::uint64_t>(k.y()), static_cast<std::uint64_t>(k.z())},
        logits);
}

Tensor random_feature_tensor(int views, int channels, int height, int width, std::uint64_t seed) {
    if (views <= 0 || channels <= 0 || height <= 0 || width <= 0)
        throw DomainError("feature tensor dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::vector<float> data(static_cast<std::size_t>(views) * channels * height * width);
    for (float& v : data)
        v = static_cast<float>(2.0 * unit(rng) - 1.0);
    return Tensor::from<float>({static_cast<std::uint64_t>(views), static_cast<std::uint64_t>(channels),
                                static_cast<std::uint64_t>(height), static_cast<std::uint64_t>(width)},
                               data);
}

OccupancyField random_occupancy(const GridSpec& spec, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw DomainError("occupancy fraction must lie in [0, 1]");
    const std::int64_t n = spec.coarse_count();
    const auto target = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::int64_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::int64_t{0});
    std::mt19937_64 rng(seed);
    // partial Fisher-Yates with an explicit draw so the result does not depend on the library
    for (std::int64_t i = 0; i < target; ++i) {
        const auto j = i + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(ids[i], ids[j]);
    }
    std::vector<std::uint8_t> occ(n, 0);
    for (std::int64_t i = 0; i < target; ++i)
        occ[ids[i]] = 1;
    return OccupancyField::binary(spec, std::move(occ));
}

} // namespace svol
