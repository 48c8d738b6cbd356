// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "svol/errors.hpp"
#include "svol/json_io.hpp"
#include "svol/parallel.hpp"

namespace svol {

TsdfVolume::TsdfVolume(const BoundingBox& bbox, const Index3& resolution, double truncation)
    : bbox_(bbox), resolution_(resolution), truncation_(truncation) {
    if ((resolution.array() < 2).any())
        throw DomainError("TSDF resolution must be at least 2 per axis");
    if (!std::isfinite(truncation))
        throw DomainError("truncation must be finite");
    if (truncation_ <= 0.0)
        truncation_ = kDefaultTruncationVoxels * voxel_edge().maxCoeff();
    const auto n = static_cast<std::size_t>(resolution.x()) * resolution.y() * resolution.z();
    tsdf_.assign(n, 1.0);
    weight_.assign(n, 0.0f);
}

TsdfVolume::TsdfVolume(const BoundingBox& bbox, int resolution, double truncation)
    : TsdfVolume(bbox, Index3::Constant(resolution), truncation) {}

Vec3 TsdfVolume::voxel_edge() const { return bbox_.extent().cwiseQuotient(resolution_.cast<double>()); }

Vec3 TsdfVolume::center(int i, int j, int k) const {
    return bbox_.min_corner() + (Vec3(i, j, k) + Vec3::Constant(0.5)).cwiseProduct(voxel_edge());
}

double TsdfVolume::tsdf_at(const Vec3& p) const {
    const Vec3 edge = voxel_edge();
    std::array<int, 3> lo{}, hi{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const double u = std::clamp((p[a] - bbox_.min_corner()[a]) / edge[a] - 0.5, 0.0,
                                    static_cast<double>(resolution_[a] - 1));
        lo[a] = std::min(static_cast<int>(std::floor(u)), resolution_[a] - 2);
        hi[a] = lo[a] + 1;
        frac[a] = u - lo[a];
    }
    double out = 0.0;
    for (int c = 0; c < 8; ++c) {
        const double w = ((c & 4) ? frac[0] : 1.0 - frac[0]) * ((c & 2) ? frac[1] : 1.0 - frac[1]) *
                         ((c & 1) ? frac[2] : 1.0 - frac[2]);
        out += w * tsdf_[index((c & 4) ? hi[0] : lo[0], (c & 2) ? hi[1] : lo[1], (c & 1) ? hi[2] : lo[2])];
    }
    return out;
}

void integrate(TsdfVolume& volume, const DepthMap& depth, const Camera& camera) {
    if (depth.width() != camera.width() || depth.height() != camera.height())
        throw DomainError("depth map size does not match its camera");
    const Index3 res = volume.resolution();
    const double trunc = volume.truncation();
    parallel_for(0, res.x(), [&](std::int64_t i) {
        for (int j = 0; j < res.y(); ++j) {
            for (int k = 0; k < res.z(); ++k) {
                const Projection proj = camera.project(volume.center(static_cast<int>(i), j, k));
                if (!proj.in_front || !proj.in_image)
                    continue;
                const int x = std::clamp(static_cast<int>(std::floor(proj.pixel.x() + 0.5)), 0, depth.width() - 1);
                const int y = std::clamp(static_cast<int>(std::floor(proj.pixel.y() + 0.5)), 0, depth.height() - 1);
                if (!depth.valid(x, y))
                    continue;
                const double sd = depth.at(x, y) - proj.depth;
                if (sd < -trunc)
                    continue;
                const double obs = std::clamp(sd / trunc, -1.0, 1.0);
                const std::int64_t v = volume.index(static_cast<int>(i), j, k);
                const double w = volume.weight(v);
                volume.set(v, (volume.tsdf(v) * w + obs) / (w + 1.0), static_cast<float>(w + 1.0));
            }
        }
    });
}

Camera virtual_view(const Camera& camera, double shift) {
    if (!std::isfinite(shift))
        throw DomainError("view shift must be finite");
    const Vec3 x_axis = camera.decompose().rotation.row(0).transpose();
    Matrix34 p = camera.projection();
    p.col(3) -= shift * (camera.projection().leftCols<3>() * x_axis);
    return Camera(p, camera.width(), camera.height());
}

void write_tsdf(const std::filesystem::path& path, const TsdfVolume& volume) {
    const Index3 r = volume.resolution();
    const auto n = static_cast<std::size_t>(volume.voxel_count());
    std::vector<float> data(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = static_cast<float>(volume.tsdf(static_cast<std::int64_t>(i)));
        data[n + i] = volume.weight(static_cast<std::int64_t>(i));
    }
    write_tensor(path, Tensor::from<float>({2, static_cast<std::uint64_t>(r.x()), static_cast<std::uint64_t>(r.y()),
                                            static_cast<std::uint64_t>(r.z())},
                                           data));
    std::filesystem::path meta = path;
    meta.replace_extension(".json");
    write_json(meta, Json{{"bbox", bbox_to_json(volume.bbox())},
                          {"resolution", {r.x(), r.y(), r.z()}},
                          {"truncation", volume.truncation()}});
}

TsdfVolume read_tsdf(const std::filesystem::path& path) {
    std::filesystem::path meta_path = path;
    meta_path.replace_extension(".json");
    const Json meta = read_json(meta_path);
    const Tensor t = read_tensor(path);
    try {
        const auto r = meta.at("resolution").get<std::vector<int>>();
        if (r.size() != 3)
            throw FormatError("resolution must have three entries");
        TsdfVolume vol(bbox_from_json(meta.at("bbox")), Index3(r[0], r[1], r[2]), meta.at("truncation").get<double>());
        if (t.shape() != Shape{2, static_cast<std::uint64_t>(r[0]), static_cast<std::uint64_t>(r[1]),
                               static_cast<std::uint64_t>(r[2])})
            throw FormatError(path.string() + ": shape does not match " + meta_path.string());
        const auto values = t.values<float>();
        const auto n = static_cast<std::size_t>(vol.voxel_count());
        for (std::size_t i = 0; i < n; ++i) {
            const float tsdf = values[i];
            const float w = values[n + i];
            if (!std::isfinite(tsdf) || std::abs(tsdf) > 1.0f || !(w >= 0.0f))
                throw FormatError(path.string() + ": tsdf values must lie in [-1, 1] with non-negative weights");
            vol.set(static_cast<std::int64_t>(i), tsdf, w);
        }
        return vol;
    } catch (const Json::exception& e) {
        throw FormatError(meta_path.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw FormatError(meta_path.string() + ": " + e.what());
    }
}

} // namespace svol
