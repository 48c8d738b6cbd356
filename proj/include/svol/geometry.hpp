// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

namespace svol {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;
using Index3 = Eigen::Vector3i;
using Matrix34 = Eigen::Matrix<double, 3, 4>;

/// Axis-aligned scene box in world units. min_corner < max_corner on every axis.
class BoundingBox {
  public:
    BoundingBox(const Vec3& min_corner, const Vec3& max_corner);

    const Vec3& min_corner() const { return min_; }
    const Vec3& max_corner() const { return max_; }
    Vec3 extent() const { return max_ - min_; }
    Vec3 center() const { return 0.5 * (min_ + max_); }
    double diagonal() const { return extent().norm(); }

    /// Closed-box containment.
    bool contains(const Vec3& p) const;

    bool operator==(const BoundingBox& other) const = default;

  private:
    Vec3 min_;
    Vec3 max_;
};

/// Voxelization of a bounding box: K coarse voxels per axis, each split into s^3 fine voxels.
///
/// Voxel i on an axis spans [min + i*edge, min + (i+1)*edge). The max corner itself is clamped
/// into the last voxel. Linear indices are x-major with z varying fastest.
class GridSpec {
  public:
    GridSpec(const BoundingBox& bbox, const Index3& coarse_resolution, int supersample);
    GridSpec(const BoundingBox& bbox, int coarse_resolution, int supersample);

    const BoundingBox& bbox() const { return bbox_; }
    const Index3& coarse_resolution() const { return coarse_; }
    int supersample() const { return supersample_; }
    Index3 fine_resolution() const { return coarse_ * supersample_; }

    Vec3 coarse_edge() const;
    Vec3 fine_edge() const;

    std::int64_t coarse_count() const;
    std::int64_t fine_count() const;
    std::int64_t local_count() const;

    std::int64_t coarse_index(const Index3& v) const;
    Index3 coarse_coord(std::int64_t index) const;
    std::int64_t local_index(const Index3& v) const;
    Index3 local_coord(std::int64_t index) const;

    bool operator==(const GridSpec& other) const = default;

  private:
    BoundingBox bbox_;
    Index3 coarse_;
    int supersample_;
};

/// The three integer frames of a supersampled grid.
enum class Frame { Global, Occupancy, Local };

struct GridCoord {
    Frame frame;
    Index3 index;
};

bool in_bounds(const GridSpec& spec, const GridCoord& coord);

/// World-space center of a Global or Occupancy voxel. Local coordinates are relative to an
/// occupancy voxel and are rejected; merge them first.
Vec3 voxel_center(const GridSpec& spec, const GridCoord& coord);

/// Global -> Occupancy (v / s) or Global -> Local (v mod s). Same-frame conversion is the identity.
GridCoord convert_frames(const GridSpec& spec, const GridCoord& coord, Frame target);

/// Inverse of the split: v_g = v_o * s + v_l.
GridCoord merge_frames(const GridSpec& spec, const GridCoord& occupancy, const GridCoord& local);

/// Voxel containing p in the Global or Occupancy frame, or nullopt when p lies outside the box.
std::optional<Index3> locate(const GridSpec& spec, const Vec3& p, Frame frame);

/// Half-open locate on an arbitrary regular lattice over a box.
std::optional<Index3> locate_in(const BoundingBox& box, const Index3& resolution, const Vec3& p);

class Ray {
  public:
    /// Normalizes the direction; throws DomainError on a zero or non-finite direction.
    Ray(const Vec3& origin, const Vec3& direction);

    const Vec3& origin() const { return origin_; }
    const Vec3& direction() const { return direction_; }
    Vec3 at(double t) const { return origin_ + t * direction_; }

  private:
    Vec3 origin_;
    Vec3 direction_;
};

struct Interval {
    double t_enter;
    double t_exit;
};

/// Slab intersection clamped to t >= 0. nullopt when the ray misses or the box is behind it.
std::optional<Interval> ray_aabb(const Ray& ray, const BoundingBox& box);

struct Projection {
    Vec2 pixel;          // continuous pixel coordinates, pixel centers at integers
    double depth;        // camera-frame depth along the principal axis
    bool in_front;       // false for w ~ 0 or depth <= 0
    bool in_image;       // pixel footprint inside [-0.5, W-0.5) x [-0.5, H-0.5)
};

/// K, R, t such that the projection is proportional to K [R | t], with K(2,2) = 1,
/// positive focal lengths and det(R) = +1.
struct PinholeDecomposition {
    Eigen::Matrix3d intrinsics;
    Eigen::Matrix3d rotation;
    Vec3 translation;
};

/// A pinhole camera given by a 3x4 world-to-pixel projection matrix.
class Camera {
  public:
    Camera(const Matrix34& projection, int width, int height);

    static Camera from_pinhole(const Eigen::Matrix3d& intrinsics, const Eigen::Matrix3d& rotation,
                               const Vec3& translation, int width, int height);

    const Matrix34& projection() const { return projection_; }
    int width() const { return width_; }
    int height() const { return height_; }

    Vec3 center() const { return center_; }
    Projection project(const Vec3& point) const;

    /// World point seen at `pixel` with camera-frame depth `depth`.
    Vec3 unproject(const Vec2& pixel, double depth) const;

    /// Ray from the optical center through `pixel`, pointing in front of the camera.
    Ray pixel_ray(const Vec2& pixel) const;

    /// Unit principal axis in world coordinates (direction of increasing depth).
    Vec3 principal_axis() const;

    PinholeDecomposition decompose() const;

  private:
    Matrix34 projection_;
    int width_;
    int height_;
    Eigen::Matrix3d m_inverse_;
    Vec3 center_;
    double depth_scale_; // sign(det M) / ||m3||
};

} // namespace svol
