// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Geometry>

#include "svol/errors.hpp"
#include "svol/parallel.hpp"

namespace svol {

KdTree::KdTree(std::vector<Vec3> points)
    : points_(std::move(points)), order_(points_.size()), axis_(points_.size(), 0) {
    if (points_.empty())
        throw DomainError("kd-tree needs at least one point");
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    build(0, points_.size(), 0);
}

void KdTree::build(std::size_t lo, std::size_t hi, int depth) {
    if (hi - lo <= 1)
        return;
    Vec3 mn = points_[order_[lo]], mx = points_[order_[lo]];
    for (std::size_t i = lo + 1; i < hi; ++i) {
        mn = mn.cwiseMin(points_[order_[i]]);
        mx = mx.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto first = order_.begin();
    std::nth_element(first + static_cast<std::ptrdiff_t>(lo), first + static_cast<std::ptrdiff_t>(mid),
                     first + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
}

void KdTree::search(std::size_t lo, std::size_t hi, const Vec3& q, Nearest& best, double& best_sq) const {
    if (lo >= hi)
        return;
    const std::size_t mid = lo + (hi - lo) / 2;
    const Vec3& p = points_[order_[mid]];
    const double d_sq = (p - q).squaredNorm();
    if (d_sq < best_sq || (d_sq == best_sq && order_[mid] < best.index)) {
        best_sq = d_sq;
        best.index = order_[mid];
    }
    if (hi - lo == 1)
        return;
    const int axis = axis_[mid];
    const double diff = q[axis] - p[axis];
    const bool left_first = diff < 0.0;
    if (left_first)
        search(lo, mid, q, best, best_sq);
    else
        search(mid + 1, hi, q, best, best_sq);
    if (diff * diff <= best_sq) {
        if (left_first)
            search(mid + 1, hi, q, best, best_sq);
        else
            search(lo, mid, q, best, best_sq);
    }
}

KdTree::Nearest KdTree::nearest(const Vec3& query) const {
    Nearest best;
    double best_sq = std::numeric_limits<double>::infinity();
    search(0, points_.size(), query, best, best_sq);
    best.distance = std::sqrt(best_sq);
    return best;
}

namespace {

double mean_nearest(std::span<const Vec3> from, const KdTree& to) {
    std::vector<double> d(from.size());
    parallel_for(0, static_cast<std::int64_t>(from.size()),
                 [&](std::int64_t i) { d[i] = to.nearest(from[i]).distance; });
    // fixed summation order keeps the result independent of the thread count
    return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
}

} // namespace

ChamferReport chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt) {
    if (pred.empty() || gt.empty())
        throw DomainError("chamfer needs two non-empty point sets");
    const KdTree gt_tree(std::vector<Vec3>(gt.begin(), gt.end()));
    const KdTree pred_tree(std::vector<Vec3>(pred.begin(), pred.end()));
    ChamferReport r;
    r.accuracy = mean_nearest(pred, gt_tree);
    r.completeness = mean_nearest(gt, pred_tree);
    r.chamfer = 0.5 * (r.accuracy + r.completeness);
    r.pred_points = pred.size();
    r.gt_points = gt.size();
    return r;
}

double surface_area(const TriangleMesh& mesh) {
    double area = 0.0;
    for (const Face& f : mesh.faces)
        area += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
    return area;
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
    mesh.validate();
    std::vector<double> cumulative;
    cumulative.reserve(mesh.faces.size());
    double total = 0.0;
    for (const Face& f : mesh.faces) {
        total += 0.5 * (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]).norm();
        cumulative.push_back(total);
    }
    std::vector<Vec3> out;
    if (count == 0 || !(total > 0.0))
        return out;
    out.reserve(count);
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (std::size_t s = 0; s < count; ++s) {
        const double r = uniform() * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        const std::size_t fi = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
        const Face& f = mesh.faces[fi];
        const double su = std::sqrt(uniform());
        const double v = uniform();
        out.push_back((1.0 - su) * mesh.vertices[f[0]] + su * (1.0 - v) * mesh.vertices[f[1]] +
                      su * v * mesh.vertices[f[2]]);
    }
    return out;
}

std::vector<Vec3> mesh_points(const TriangleMesh& mesh, double density, std::uint64_t seed) {
    if (!(density >= 0.0))
        throw DomainError("sampling density must be non-negative");
    std::vector<Vec3> points = mesh.vertices;
    const auto extra = static_cast<std::size_t>(std::llround(density * surface_area(mesh)));
    const auto samples = sample_surface(mesh, extra, seed);
    points.insert(points.end(), samples.begin(), samples.end());
    return points;
}

double auc_from_angles(std::span<const double> angles, double max_angle) {
    if (!(max_angle > 0.0))
        throw DomainError("max_angle must be positive");
    if (angles.empty())
        return 0.0;
    double sum = 0.0;
    for (const double a : angles)
        sum += std::max(0.0, 1.0 - a / max_angle);
    return 100.0 * sum / static_cast<double>(angles.size());
}

std::vector<Vec3> consistency_normals(const TriangleMesh& mesh) {
    mesh.validate();
    if (!mesh.faces.empty())
        return area_weighted_normals(mesh);
    if (mesh.has_normals())
        return mesh.normals;
    throw DomainError("mesh has neither faces nor vertex normals");
}

NormalConsistencyReport normal_consistency(const TriangleMesh& pred, const TriangleMesh& gt,
                                           const NormalConsistencyOptions& options) {
    const std::vector<Vec3> pred_n = consistency_normals(pred);
    const std::vector<Vec3> gt_n = consistency_normals(gt);
    NormalConsistencyReport report;

    auto usable = [](const Vec3& n) { return n.allFinite() && n.squaredNorm() > 0.25; };
    std::vector<Vec3> gt_points;
    std::vector<Vec3> gt_normals;
    for (std::size_t i = 0; i < gt.vertices.size(); ++i) {
        if (usable(gt_n[i])) {
            gt_points.push_back(gt.vertices[i]);
            gt_normals.push_back(gt_n[i].normalized());
        } else {
            ++report.degenerate_gt;
        }
    }
    if (gt_points.empty())
        throw DomainError("ground-truth mesh has no usable vertex normals");
    const KdTree tree(std::move(gt_points));

    std::vector<std::size_t> pred_ids;
    for (std::size_t i = 0; i < pred.vertices.size(); ++i) {
        if (usable(pred_n[i]))
            pred_ids.push_back(i);
        else
            ++report.degenerate_pred;
    }
    report.angles.resize(pred_ids.size());
    parallel_for(0, static_cast<std::int64_t>(pred_ids.size()), [&](std::int64_t k) {
        const std::size_t i = pred_ids[k];
        const Vec3 n = pred_n[i].normalized();
        const Vec3& m = gt_normals[tree.nearest(pred.vertices[i]).index];
        // atan2 stays accurate for nearly parallel normals, where acos loses half the digits
        double c = n.dot(m);
        if (options.sign_agnostic)
            c = std::abs(c);
        report.angles[k] = std::atan2(n.cross(m).norm(), c) * 180.0 / std::numbers::pi;
    });
    report.auc = auc_from_angles(report.angles, options.max_angle);
    return report;
}

} // namespace svol
