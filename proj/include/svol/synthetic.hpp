// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "svol/features.hpp"
#include "svol/geometry.hpp"
#include "svol/mesh.hpp"
#include "svol/occupancy.hpp"
#include "svol/tensorio.hpp"

namespace svol {

/// Cameras around an analytic sphere, used for tests, benchmarks and the `synth` command.
struct SphereScene {
    BoundingBox bbox;
    Vec3 center;
    double radius;
    std::vector<Camera> cameras;
};

struct SphereSceneOptions {
    double radius = 0.3;
    double box_half_extent = 0.5;
    double camera_distance = 1.5;
    int image_size = 128;
    /// 8 views at the cube-corner directions, or a ring of views around the z axis for other counts.
    int views = 8;
};

SphereScene make_sphere_scene(const SphereSceneOptions& options = {});

/// Camera at `eye` looking at `target` with square pixels; the field of view fits a sphere of
/// `fit_radius` around the target.
Camera look_at_camera(const Vec3& eye, const Vec3& target, int width, int height, double fit_radius);

/// Exact z-depth of the sphere at every pixel center; misses are invalid.
DepthMap render_sphere_depth(const Camera& camera, const Vec3& center, double radius);

/// Uniform samples on the sphere surface.
std::vector<Vec3> sample_sphere(const Vec3& center, double radius, std::size_t count, std::uint64_t seed);

/// Latitude-longitude sphere mesh with outward normals.
TriangleMesh sphere_mesh(const Vec3& center, double radius, int rings, int segments);

/// Coarse voxels whose box intersects the sphere surface.
OccupancyField sphere_shell_occupancy(const GridSpec& spec, const Vec3& center, double radius);

/// Occupancy logits: a smooth bump around the sphere shell plus seeded uniform noise.
Tensor sphere_logits(const GridSpec& spec, const Vec3& center, double radius, double noise, std::uint64_t seed);

/// Random [views, channels, height, width] f32 features in [-1, 1].
Tensor random_feature_tensor(int views, int channels, int height, int width, std::uint64_t seed);

/// Random occupancy with the given fraction of occupied voxels (exact count, seeded positions).
OccupancyField random_occupancy(const GridSpec& spec, double fraction, std::uint64_t seed);

} // namespace svol
