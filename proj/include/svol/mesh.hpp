// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "svol/geometry.hpp"

namespace svol {

using Face = std::array<std::int32_t, 3>;

/// Triangle mesh or, with no faces, a point cloud. `normals` is either empty or one unit vector per vertex.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<Vec3> normals;

    bool has_normals() const { return !normals.empty() && normals.size() == vertices.size(); }

    /// Throws DomainError on out-of-range face indices or a normals array of the wrong length.
    void validate() const;
};

/// Area-weighted average of incident face normals. Vertices with no incident area get a zero vector.
std::vector<Vec3> area_weighted_normals(const TriangleMesh& mesh);

/// Number of undirected edges not shared by exactly two faces. Zero for a closed manifold surface.
std::size_t count_boundary_or_nonmanifold_edges(const TriangleMesh& mesh);

} // namespace svol
