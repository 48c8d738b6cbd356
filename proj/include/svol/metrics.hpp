// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svol/geometry.hpp"
#include "svol/mesh.hpp"

namespace svol {

/// Static 3D kd-tree for exact nearest-neighbor queries.
class KdTree {
  public:
    explicit KdTree(std::vector<Vec3> points);

    struct Nearest {
        std::size_t index = 0;
        double distance = 0.0;
    };

    /// Exact nearest point; `index` refers to the order the points were given in.
    Nearest nearest(const Vec3& query) const;

    std::size_t size() const { return points_.size(); }
    const Vec3& point(std::size_t i) const { return points_[i]; }

  private:
    void build(std::size_t lo, std::size_t hi, int depth);
    void search(std::size_t lo, std::size_t hi, const Vec3& q, Nearest& best, double& best_sq) const;

    std::vector<Vec3> points_;
    std::vector<std::size_t> order_; // tree layout: median of [lo, hi) at the middle slot
    std::vector<std::uint8_t> axis_; // split axis of the node stored at that slot
};

struct ChamferReport {
    double accuracy = 0.0;     // mean distance pred -> gt
    double completeness = 0.0; // mean distance gt -> pred
    double chamfer = 0.0;      // (accuracy + completeness) / 2
    std::size_t pred_points = 0;
    std::size_t gt_points = 0;
};

/// Plain symmetric Chamfer distance; throws DomainError if either set is empty.
ChamferReport chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Area-weighted uniform samples on the mesh surface; deterministic for a seed.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

double surface_area(const TriangleMesh& mesh);

/// Vertices plus round(density * area) surface samples, the point set used for mesh Chamfer.
std::vector<Vec3> mesh_points(const TriangleMesh& mesh, double density, std::uint64_t seed);

struct NormalConsistencyOptions {
    double max_angle = 15.0; // degrees
    /// Compare |n1 . n2| instead of n1 . n2, ignoring orientation.
    bool sign_agnostic = false;
};

struct NormalConsistencyReport {
    std::vector<double> angles; // degrees, one per pred vertex with a usable normal
    double auc = 0.0;           // percentage
    std::size_t degenerate_pred = 0;
    std::size_t degenerate_gt = 0;
};

/// Mean over angles of max(0, 1 - angle / max_angle), as a percentage. This equals the area under
/// the cumulative fraction-below-threshold curve on [0, max_angle], normalized by max_angle.
double auc_from_angles(std::span<const double> angles, double max_angle);

/// Vertex normals used for normal consistency: area-weighted face normals when the mesh has
/// faces, otherwise the stored normals. Throws DomainError when neither exists.
std::vector<Vec3> consistency_normals(const TriangleMesh& mesh);

/// For each pred vertex, the angle to the normal of the closest gt vertex. Vertices whose normal
/// is degenerate (zero area) are left out on both sides and counted.
NormalConsistencyReport normal_consistency(const TriangleMesh& pred, const TriangleMesh& gt,
                                           const NormalConsistencyOptions& options = {});

} // namespace svol
