// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "svol/geometry.hpp"
#include "svol/mesh.hpp"
#include "svol/tensorio.hpp"

namespace svol {

inline constexpr int kDefaultTsdfResolution = 256;
inline constexpr double kDefaultTruncationVoxels = 2.0;

/// Truncated signed distance volume over a box, sampled at voxel centers. Untouched voxels have
/// weight 0 and tsdf 1.
class TsdfVolume {
  public:
    /// truncation <= 0 selects kDefaultTruncationVoxels voxel edges (largest axis).
    TsdfVolume(const BoundingBox& bbox, const Index3& resolution, double truncation = 0.0);
    TsdfVolume(const BoundingBox& bbox, int resolution, double truncation = 0.0);

    const BoundingBox& bbox() const { return bbox_; }
    const Index3& resolution() const { return resolution_; }
    double truncation() const { return truncation_; }
    Vec3 voxel_edge() const;
    std::int64_t voxel_count() const { return static_cast<std::int64_t>(tsdf_.size()); }

    std::int64_t index(int i, int j, int k) const {
        return (std::int64_t{i} * resolution_.y() + j) * resolution_.z() + k;
    }
    Vec3 center(int i, int j, int k) const;

    double tsdf(std::int64_t i) const { return tsdf_[i]; }
    float weight(std::int64_t i) const { return weight_[i]; }
    std::span<const double> tsdf_values() const { return tsdf_; }
    std::span<const float> weights() const { return weight_; }

    /// Trilinear interpolation over voxel centers, clamped to the outer layer of centers.
    double tsdf_at(const Vec3& p) const;

    /// Direct access for integration and deserialization.
    void set(std::int64_t i, double tsdf, float weight) {
        tsdf_[i] = tsdf;
        weight_[i] = weight;
    }

  private:
    BoundingBox bbox_;
    Index3 resolution_;
    double truncation_;
    std::vector<double> tsdf_;
    std::vector<float> weight_;
};

/// Fuses one depth map. Each voxel center is projected into the view and looked up at the nearest
/// pixel; the observation clamp(sd / truncation, -1, 1) with sd = depth - voxel depth is
/// averaged in with weight 1. Voxels with sd < -truncation, behind the camera, outside the image
/// or on invalid pixels are left alone.
void integrate(TsdfVolume& volume, const DepthMap& depth, const Camera& camera);

/// The camera translated by `shift` scene units along its own x axis, intrinsics unchanged.
Camera virtual_view(const Camera& camera, double shift);

/// Marching cubes over the lattice of voxel centers. Cells with any weight-0 corner are skipped.
/// Triangles wind counter-clockwise seen from the side where tsdf > iso; shared edge vertices
/// are merged, and vertex normals are area-weighted face normals.
TriangleMesh marching_cubes(const TsdfVolume& volume, double iso = 0.0);

/// Triangle table used by marching_cubes: for each of the 256 corner sign patterns (bit c set when
/// corner c is below the iso value), triangles as triples of cube edge ids.
const std::array<std::vector<std::array<int, 3>>, 256>& marching_cubes_table();

/// Cube corners (unit offsets) and edges (corner pairs) in the order used by the table.
inline constexpr std::array<std::array<int, 3>, 8> kCubeCorners{
    {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};
inline constexpr std::array<std::array<int, 2>, 12> kCubeEdges{
    {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

/// `<path>` holds an f32 [2, Rx, Ry, Rz] tensor (tsdf, weight); `<path>` with extension .json
/// holds the box and truncation.
void write_tsdf(const std::filesystem::path& path, const TsdfVolume& volume);
TsdfVolume read_tsdf(const std::filesystem::path& path);

} // namespace svol
