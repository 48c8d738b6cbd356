// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "svol/errors.hpp"

namespace svol {

BoundingBox::BoundingBox(const Vec3& min_corner, const Vec3& max_corner) : min_(min_corner), max_(max_corner) {
    if (!min_.allFinite() || !max_.allFinite())
        throw DomainError("bounding box corners must be finite");
    if ((min_.array() >= max_.array()).any())
        throw DomainError("bounding box min_corner must be < max_corner on every axis");
}

bool BoundingBox::contains(const Vec3& p) const {
    return (p.array() >= min_.array()).all() && (p.array() <= max_.array()).all();
}

GridSpec::GridSpec(const BoundingBox& bbox, const Index3& coarse_resolution, int supersample)
    : bbox_(bbox), coarse_(coarse_resolution), supersample_(supersample) {
    if ((coarse_.array() <= 0).any())
        throw DomainError("coarse resolution must be positive");
    if (supersample_ <= 0)
        throw DomainError("supersample factor must be positive");
    // keep (sK)^3 addressable with 32-bit per-axis coordinates and 64-bit linear indices
    if ((coarse_.cast<std::int64_t>().array() * supersample_ > (1 << 20)).any())
        throw DomainError("effective resolution too large");
}

GridSpec::GridSpec(const BoundingBox& bbox, int coarse_resolution, int supersample)
    : GridSpec(bbox, Index3::Constant(coarse_resolution), supersample) {}

Vec3 GridSpec::coarse_edge() const { return bbox_.extent().cwiseQuotient(coarse_.cast<double>()); }

Vec3 GridSpec::fine_edge() const { return bbox_.extent().cwiseQuotient(fine_resolution().cast<double>()); }

std::int64_t GridSpec::coarse_count() const {
    return std::int64_t{coarse_.x()} * coarse_.y() * coarse_.z();
}

std::int64_t GridSpec::fine_count() const { return coarse_count() * local_count(); }

std::int64_t GridSpec::local_count() const {
    return std::int64_t{supersample_} * supersample_ * supersample_;
}

std::int64_t GridSpec::coarse_index(const Index3& v) const {
    return (std::int64_t{v.x()} * coarse_.y() + v.y()) * coarse_.z() + v.z();
}

Index3 GridSpec::coarse_coord(std::int64_t index) const {
    const int z = static_cast<int>(index % coarse_.z());
    index /= coarse_.z();
    const int y = static_cast<int>(index % coarse_.y());
    const int x = static_cast<int>(index / coarse_.y());
    return {x, y, z};
}

std::int64_t GridSpec::local_index(const Index3& v) const {
    return (std::int64_t{v.x()} * supersample_ + v.y()) * supersample_ + v.z();
}

Index3 GridSpec::local_coord(std::int64_t index) const {
    const int s = supersample_;
    return {static_cast<int>(index / (s * s)), static_cast<int>((index / s) % s), static_cast<int>(index % s)};
}

namespace {

Index3 frame_extent(const GridSpec& spec, Frame frame) {
    switch (frame) {
    case Frame::Global:
        return spec.fine_resolution();
    case Frame::Occupancy:
        return spec.coarse_resolution();
    case Frame::Local:
        return Index3::Constant(spec.supersample());
    }
    return Index3::Zero();
}

const char* frame_name(Frame frame) {
    switch (frame) {
    case Frame::Global:
        return "global";
    case Frame::Occupancy:
        return "occupancy";
    case Frame::Local:
        return "local";
    }
    return "?";
}

void require_in_bounds(const GridSpec& spec, const GridCoord& coord) {
    if (!in_bounds(spec, coord)) {
        throw DomainError(std::string(frame_name(coord.frame)) + " coordinate (" + std::to_string(coord.index.x()) +
                          "," + std::to_string(coord.index.y()) + "," + std::to_string(coord.index.z()) +
                          ") out of range");
    }
}

} // namespace

bool in_bounds(const GridSpec& spec, const GridCoord& coord) {
    const Index3 n = frame_extent(spec, coord.frame);
    return (coord.index.array() >= 0).all() && (coord.index.array() < n.array()).all();
}

Vec3 voxel_center(const GridSpec& spec, const GridCoord& coord) {
    require_in_bounds(spec, coord);
    switch (coord.frame) {
    case Frame::Global:
        return spec.bbox().min_corner() + (coord.index.cast<double>().array() + 0.5).matrix().cwiseProduct(spec.fine_edge());
    case Frame::Occupancy:
        return spec.bbox().min_corner() +
               (coord.index.cast<double>().array() + 0.5).matrix().cwiseProduct(spec.coarse_edge());
    case Frame::Local:
        break;
    }
    throw DomainError("local coordinates have no world position on their own; merge with an occupancy coordinate");
}

GridCoord convert_frames(const GridSpec& spec, const GridCoord& coord, Frame target) {
    require_in_bounds(spec, coord);
    if (coord.frame == target)
        return coord;
    if (coord.frame != Frame::Global)
        throw DomainError("only global coordinates can be split; use merge_frames for occupancy+local");
    const int s = spec.supersample();
    // indices are non-negative, so integer division is floor division
    if (target == Frame::Occupancy)
        return {Frame::Occupancy, coord.index / s};
    return {Frame::Local, coord.index.unaryExpr([s](int v) { return v % s; })};
}

GridCoord merge_frames(const GridSpec& spec, const GridCoord& occupancy, const GridCoord& local) {
    if (occupancy.frame != Frame::Occupancy || local.frame != Frame::Local)
        throw DomainError("merge_frames expects an (occupancy, local) pair");
    require_in_bounds(spec, occupancy);
    require_in_bounds(spec, local);
    return {Frame::Global, occupancy.index * spec.supersample() + local.index};
}

std::optional<Index3> locate_in(const BoundingBox& box, const Index3& resolution, const Vec3& p) {
    if (!p.allFinite() || !box.contains(p))
        return std::nullopt;
    Index3 out;
    for (int a = 0; a < 3; ++a) {
        const double edge = box.extent()[a] / resolution[a];
        const double f = (p[a] - box.min_corner()[a]) / edge;
        const auto i = static_cast<std::int64_t>(std::floor(f));
        out[a] = static_cast<int>(std::clamp<std::int64_t>(i, 0, resolution[a] - 1));
    }
    return out;
}

std::optional<Index3> locate(const GridSpec& spec, const Vec3& p, Frame frame) {
    if (frame == Frame::Local)
        throw DomainError("locate supports the global and occupancy frames only");
    return locate_in(spec.bbox(), frame_extent(spec, frame), p);
}

Ray::Ray(const Vec3& origin, const Vec3& direction) : origin_(origin) {
    const double n = direction.norm();
    if (!origin.allFinite() || !std::isfinite(n) || n == 0.0)
        throw DomainError("ray needs a finite origin and a non-zero finite direction");
    direction_ = direction / n;
}

std::optional<Interval> ray_aabb(const Ray& ray, const BoundingBox& box) {
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin()[a];
        const double d = ray.direction()[a];
        const double lo = box.min_corner()[a];
        const double hi = box.max_corner()[a];
        if (d == 0.0) {
            if (o < lo || o > hi)
                return std::nullopt;
            continue;
        }
        double ta = (lo - o) / d;
        double tb = (hi - o) / d;
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    t0 = std::max(t0, 0.0);
    if (t1 < t0)
        return std::nullopt;
    return Interval{t0, t1};
}

Camera::Camera(const Matrix34& projection, int width, int height)
    : projection_(projection), width_(width), height_(height) {
    if (!projection_.allFinite())
        throw DomainError("camera projection must be finite");
    if (width_ <= 0 || height_ <= 0)
        throw DomainError("camera image size must be positive");
    const Eigen::Matrix3d m = projection_.leftCols<3>();
    Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    if (lu.rank() < 3)
        throw DomainError("camera projection must have rank 3 with an invertible left 3x3 block");
    m_inverse_ = lu.inverse();
    center_ = -m_inverse_ * projection_.col(3);
    const double det = m.determinant();
    depth_scale_ = (det > 0 ? 1.0 : -1.0) / m.row(2).norm();
}

Camera Camera::from_pinhole(const Eigen::Matrix3d& intrinsics, const Eigen::Matrix3d& rotation,
                            const Vec3& translation, int width, int height) {
    Matrix34 rt;
    rt.leftCols<3>() = rotation;
    rt.col(3) = translation;
    return Camera(intrinsics * rt, width, height);
}

Projection Camera::project(const Vec3& point) const {
    const Vec3 h = projection_.leftCols<3>() * point + projection_.col(3);
    Projection out;
    out.depth = depth_scale_ * h.z();
    constexpr double kMinW = 1e-12;
    if (std::abs(h.z()) < kMinW || !std::isfinite(h.z())) {
        out.pixel = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
        out.in_front = false;
        out.in_image = false;
        return out;
    }
    out.pixel = h.head<2>() / h.z();
    out.in_front = out.depth > 0.0;
    out.in_image = out.in_front && out.pixel.x() >= -0.5 && out.pixel.x() < width_ - 0.5 && out.pixel.y() >= -0.5 &&
                   out.pixel.y() < height_ - 0.5;
    return out;
}

Vec3 Camera::unproject(const Vec2& pixel, double depth) const {
    // P [X;1] = lambda [u;v;1] with depth = depth_scale * lambda
    const double lambda = depth / depth_scale_;
    const Vec3 xh(pixel.x(), pixel.y(), 1.0);
    return m_inverse_ * (lambda * xh - projection_.col(3));
}

Ray Camera::pixel_ray(const Vec2& pixel) const { return Ray(center_, unproject(pixel, 1.0) - center_); }

Vec3 Camera::principal_axis() const {
    // depth increases along grad(depth) = depth_scale * m3
    return (depth_scale_ * projection_.block<1, 3>(2, 0).transpose()).normalized();
}

PinholeDecomposition Camera::decompose() const {
    const Eigen::Matrix3d m = projection_.leftCols<3>();
    const double sign = m.determinant() > 0 ? 1.0 : -1.0;
    const Eigen::Matrix3d ms = sign * m;

    // RQ via QR of the row-reversed transpose
    Eigen::Matrix3d flip = Eigen::Matrix3d::Zero();
    flip(0, 2) = flip(1, 1) = flip(2, 0) = 1.0;
    Eigen::HouseholderQR<Eigen::Matrix3d> qr((flip * ms).transpose());
    const Eigen::Matrix3d q = qr.householderQ();
    const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
    Eigen::Matrix3d k = flip * r.transpose() * flip;
    Eigen::Matrix3d rot = flip * q.transpose();

    const Eigen::Vector3d d = k.diagonal().unaryExpr([](double v) { return v < 0 ? -1.0 : 1.0; });
    k = k * d.asDiagonal();
    rot = d.asDiagonal() * rot;

    const double scale = k(2, 2);
    PinholeDecomposition out;
    out.translation = k.inverse() * (sign * projection_.col(3));
    out.intrinsics = k / scale;
    out.rotation = rot;
    return out;
}

} // namespace svol
