// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Geometry>

#include "svol/fusion.hpp"
#include "svol/parallel.hpp"

namespace svol {

namespace {

struct CubeFace {
    std::array<int, 4> corners; // cyclic
    Vec3 normal;                // pointing out of the cube
};

const std::array<CubeFace, 6> kFaces{{
    {{0, 1, 2, 3}, {0, 0, -1}},
    {{4, 5, 6, 7}, {0, 0, 1}},
    {{0, 1, 5, 4}, {0, -1, 0}},
    {{1, 2, 6, 5}, {1, 0, 0}},
    {{2, 3, 7, 6}, {0, 1, 0}},
    {{3, 0, 4, 7}, {-1, 0, 0}},
}};

Vec3 corner_pos(int c) { return Vec3(kCubeCorners[c][0], kCubeCorners[c][1], kCubeCorners[c][2]); }

int edge_between(int a, int b) {
    for (int e = 0; e < 12; ++e)
        if ((kCubeEdges[e][0] == a && kCubeEdges[e][1] == b) || (kCubeEdges[e][0] == b && kCubeEdges[e][1] == a))
            return e;
    throw std::logic_error("corners do not share a cube edge");
}

Vec3 edge_mid(int e) { return 0.5 * (corner_pos(kCubeEdges[e][0]) + corner_pos(kCubeEdges[e][1])); }

// The iso-contour on each face separates inside corners from outside ones; on a face with
// alternating signs, each inside corner is cut off on its own. Both cubes sharing a face see the
// same rule, so the surface closes up across cells. Each face segment is directed so the polygon
// it bounds winds counter-clockwise seen from outside, then segments chain into loops.
std::vector<std::array<int, 3>> triangulate_case(int bits) {
    auto inside = [bits](int c) { return ((bits >> c) & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);

    auto add_segment = [&](int ea, int eb, const Vec3& toward_outside, const Vec3& face_normal) {
        const Vec3 d = edge_mid(eb) - edge_mid(ea);
        if (toward_outside.cross(d).dot(-face_normal) < 0.0)
            std::swap(ea, eb);
        if (next[ea] != -1)
            throw std::logic_error("marching cubes edge used twice");
        next[ea] = eb;
    };

    for (const CubeFace& f : kFaces) {
        std::array<int, 4> edges{};
        std::array<bool, 4> crosses{};
        int count = 0;
        for (int k = 0; k < 4; ++k) {
            const int a = f.corners[k];
            const int b = f.corners[(k + 1) % 4];
            edges[k] = edge_between(a, b);
            crosses[k] = inside(a) != inside(b);
            count += crosses[k] ? 1 : 0;
        }
        if (count == 2) {
            std::array<int, 2> es{};
            int n = 0;
            for (int k = 0; k < 4; ++k)
                if (crosses[k])
                    es[n++] = edges[k];
            Vec3 in_c = Vec3::Zero(), out_c = Vec3::Zero();
            int n_in = 0, n_out = 0;
            for (const int c : f.corners) {
                if (inside(c)) {
                    in_c += corner_pos(c);
                    ++n_in;
                } else {
                    out_c += corner_pos(c);
                    ++n_out;
                }
            }
            add_segment(es[0], es[1], out_c / n_out - in_c / n_in, f.normal);
        } else if (count == 4) {
            for (int k = 0; k < 4; ++k) {
                const int c = f.corners[k];
                if (!inside(c))
                    continue;
                const int e_prev = edges[(k + 3) % 4];
                const int e_next = edges[k];
                const Vec3 mid = 0.5 * (edge_mid(e_prev) + edge_mid(e_next));
                add_segment(e_prev, e_next, mid - corner_pos(c), f.normal);
            }
        }
    }

    std::vector<std::array<int, 3>> tris;
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
        if (next[start] == -1 || used[start])
            continue;
        std::vector<int> loop;
        for (int e = start; !used[e]; e = next[e]) {
            if (next[e] == -1)
                throw std::logic_error("marching cubes contour does not close");
            used[e] = true;
            loop.push_back(e);
        }
        for (std::size_t i = 1; i + 1 < loop.size(); ++i)
            tris.push_back({loop[0], loop[i], loop[i + 1]});
    }
    return tris;
}

std::array<std::vector<std::array<int, 3>>, 256> build_table() {
    std::array<std::vector<std::array<int, 3>>, 256> table;
    for (int bits = 0; bits < 256; ++bits)
        table[bits] = triangulate_case(bits);
    return table;
}

} // namespace

const std::array<std::vector<std::array<int, 3>>, 256>& marching_cubes_table() {
    static const auto table = build_table();
    return table;
}

TriangleMesh marching_cubes(const TsdfVolume& volume, double iso) {
    const auto& table = marching_cubes_table();
    const Index3 res = volume.resolution();
    const int cells_x = res.x() - 1;

    // edge key: lattice index of the edge's lower corner * 3 + axis
    auto edge_key = [&](int i, int j, int k, int e) {
        const auto& a = kCubeCorners[kCubeEdges[e][0]];
        const auto& b = kCubeCorners[kCubeEdges[e][1]];
        int axis = 0;
        while (a[axis] == b[axis])
            ++axis;
        const std::int64_t base =
            volume.index(i + std::min(a[0], b[0]), j + std::min(a[1], b[1]), k + std::min(a[2], b[2]));
        return static_cast<std::uint64_t>(base) * 3 + static_cast<std::uint64_t>(axis);
    };

    std::vector<std::vector<std::array<std::uint64_t, 3>>> slabs(std::max(cells_x, 0));
    parallel_for(0, cells_x, [&](std::int64_t i64) {
        const int i = static_cast<int>(i64);
        auto& out = slabs[i];
        std::array<double, 8> v{};
        for (int j = 0; j + 1 < res.y(); ++j) {
            for (int k = 0; k + 1 < res.z(); ++k) {
                int bits = 0;
                bool observed = true;
                for (int c = 0; c < 8 && observed; ++c) {
                    const std::int64_t idx =
                        volume.index(i + kCubeCorners[c][0], j + kCubeCorners[c][1], k + kCubeCorners[c][2]);
                    observed = volume.weight(idx) > 0.0f;
                    v[c] = volume.tsdf(idx);
                    if (v[c] < iso)
                        bits |= 1 << c;
                }
                if (!observed || bits == 0 || bits == 255)
                    continue;
                for (const auto& tri : table[bits])
                    out.push_back({edge_key(i, j, k, tri[0]), edge_key(i, j, k, tri[1]), edge_key(i, j, k, tri[2])});
            }
        }
    });

    TriangleMesh mesh;
    std::unordered_map<std::uint64_t, std::int32_t> vertex_of;
    const std::int64_t plane = std::int64_t{res.y()} * res.z();
    auto vertex = [&](std::uint64_t key) {
        const auto [it, inserted] = vertex_of.try_emplace(key, static_cast<std::int32_t>(mesh.vertices.size()));
        if (inserted) {
            const auto axis = static_cast<int>(key % 3);
            const auto lower = static_cast<std::int64_t>(key / 3);
            const int i = static_cast<int>(lower / plane);
            const int j = static_cast<int>((lower / res.z()) % res.y());
            const int k = static_cast<int>(lower % res.z());
            Index3 up(i, j, k);
            up[axis] += 1;
            const double v0 = volume.tsdf(lower);
            const double v1 = volume.tsdf(volume.index(up.x(), up.y(), up.z()));
            const double t = (iso - v0) / (v1 - v0);
            const Vec3 p0 = volume.center(i, j, k);
            const Vec3 p1 = volume.center(up.x(), up.y(), up.z());
            mesh.vertices.push_back(p0 + t * (p1 - p0));
        }
        return it->second;
    };
    for (const auto& slab : slabs)
        for (const auto& tri : slab)
            mesh.faces.push_back({vertex(tri[0]), vertex(tri[1]), vertex(tri[2])});

    mesh.normals = area_weighted_normals(mesh);
    return mesh;
}

} // namespace svol
