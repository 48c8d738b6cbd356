// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/features.hpp"

#include <algorithm>
#include <cmath>

#include "svol/errors.hpp"
#include "svol/parallel.hpp"

namespace svol {

FeatureMap::FeatureMap(int channels, int height, int width, std::vector<float> data, double scale)
    : channels_(channels), height_(height), width_(width), scale_(scale), data_(std::move(data)) {
    if (channels <= 0 || height <= 0 || width <= 0)
        throw DomainError("feature map dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(channels) * height * width)
        throw DomainError("feature map data size does not match C x H x W");
    if (!(scale > 0.0 && scale <= 1.0))
        throw DomainError("feature map scale must lie in (0, 1]");
    for (const float v : data_)
        if (!std::isfinite(v))
            throw DomainError("feature map values must be finite");
}

std::vector<FeatureMap> feature_maps_from_tensor(const Tensor& tensor, double scale) {
    if (tensor.rank() != 4)
        throw DomainError("feature tensor must have shape [M, C, H, W]");
    const auto& s = tensor.shape();
    const auto values = tensor.values<float>();
    const std::size_t per_view = static_cast<std::size_t>(s[1] * s[2] * s[3]);
    std::vector<FeatureMap> maps;
    maps.reserve(s[0]);
    for (std::uint64_t m = 0; m < s[0]; ++m) {
        auto first = values.begin() + static_cast<std::ptrdiff_t>(m * per_view);
        maps.emplace_back(static_cast<int>(s[1]), static_cast<int>(s[2]), static_cast<int>(s[3]),
                          std::vector<float>(first, first + static_cast<std::ptrdiff_t>(per_view)), scale);
    }
    return maps;
}

bool sample_feature_into(const FeatureMap& map, const Camera& camera, const Vec3& point, std::span<float> out) {
    const Projection proj = camera.project(point);
    if (!proj.in_front)
        return false;
    const double fx = (proj.pixel.x() + 0.5) * map.scale() - 0.5;
    const double fy = (proj.pixel.y() + 0.5) * map.scale() - 0.5;
    if (!(fx >= -0.5 && fx < map.width() - 0.5 && fy >= -0.5 && fy < map.height() - 0.5))
        return false;
    // clamp into the lattice of pixel centers; the half-pixel border replicates the edge
    const double cx = std::clamp(fx, 0.0, static_cast<double>(map.width() - 1));
    const double cy = std::clamp(fy, 0.0, static_cast<double>(map.height() - 1));
    const int x0 = std::min(static_cast<int>(std::floor(cx)), map.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(cy)), map.height() - 1);
    const int x1 = std::min(x0 + 1, map.width() - 1);
    const int y1 = std::min(y0 + 1, map.height() - 1);
    const double ax = cx - x0;
    const double ay = cy - y0;
    for (int c = 0; c < map.channels(); ++c) {
        const double top = (1.0 - ax) * map.at(c, y0, x0) + ax * map.at(c, y0, x1);
        const double bottom = (1.0 - ax) * map.at(c, y1, x0) + ax * map.at(c, y1, x1);
        out[c] = static_cast<float>((1.0 - ay) * top + ay * bottom);
    }
    return true;
}

std::optional<std::vector<float>> sample_feature(const FeatureMap& map, const Camera& camera, const Vec3& point) {
    std::vector<float> out(map.channels());
    if (!sample_feature_into(map, camera, point, out))
        return std::nullopt;
    return out;
}

std::vector<float> AggregatedFeature::concatenated() const {
    std::vector<float> out(mean);
    out.insert(out.end(), variance.begin(), variance.end());
    return out;
}

AggregatedFeature meanvar(std::span<const std::optional<std::vector<float>>> views, int image_channels) {
    AggregatedFeature out;
    out.mean.assign(image_channels, 0.0f);
    out.variance.assign(image_channels, 0.0f);
    std::vector<double> sum(image_channels, 0.0);
    int m = 0;
    for (const auto& v : views) {
        if (!v)
            continue;
        if (static_cast<int>(v->size()) != image_channels)
            throw DomainError("view feature length does not match the channel count");
        for (int c = 0; c < image_channels; ++c)
            sum[c] += (*v)[c];
        ++m;
    }
    if (m == 0)
        return out;
    out.valid = true;
    std::vector<double> mean(image_channels);
    for (int c = 0; c < image_channels; ++c)
        mean[c] = sum[c] / m;
    std::vector<double> sq(image_channels, 0.0);
    for (const auto& v : views) {
        if (!v)
            continue;
        for (int c = 0; c < image_channels; ++c) {
            const double d = (*v)[c] - mean[c];
            sq[c] += d * d;
        }
    }
    for (int c = 0; c < image_channels; ++c) {
        out.mean[c] = static_cast<float>(mean[c]);
        out.variance[c] = static_cast<float>(std::max(0.0, sq[c] / m));
    }
    return out;
}

int check_views(std::span<const FeatureMap> maps, std::span<const Camera> cameras) {
    if (maps.empty())
        throw DomainError("at least one view is required");
    if (maps.size() != cameras.size())
        throw DomainError("feature maps and cameras must be paired");
    const int c = maps.front().channels();
    for (const auto& m : maps)
        if (m.channels() != c)
            throw DomainError("all feature maps must have the same channel count");
    return c;
}

bool aggregate_at_into(const Vec3& point, std::span<const FeatureMap> maps, std::span<const Camera> cameras,
                       std::span<float> out) {
    const int c_img = maps.front().channels();
    // two-pass population statistics in double, same as meanvar
    thread_local std::vector<float> samples;
    thread_local std::vector<std::uint8_t> hit;
    samples.resize(maps.size() * c_img);
    hit.assign(maps.size(), 0);
    int m = 0;
    for (std::size_t v = 0; v < maps.size(); ++v) {
        if (sample_feature_into(maps[v], cameras[v], point, std::span<float>(samples).subspan(v * c_img, c_img))) {
            hit[v] = 1;
            ++m;
        }
    }
    std::fill(out.begin(), out.begin() + 2 * c_img, 0.0f);
    if (m == 0)
        return false;
    for (int c = 0; c < c_img; ++c) {
        double sum = 0.0;
        for (std::size_t v = 0; v < maps.size(); ++v)
            if (hit[v])
                sum += samples[v * c_img + c];
        const double mean = sum / m;
        double sq = 0.0;
        for (std::size_t v = 0; v < maps.size(); ++v)
            if (hit[v]) {
                const double d = samples[v * c_img + c] - mean;
                sq += d * d;
            }
        out[c] = static_cast<float>(mean);
        out[c_img + c] = static_cast<float>(std::max(0.0, sq / m));
    }
    return true;
}

DenseFeatureVolume build_dense_volume(const GridSpec& spec, std::span<const FeatureMap> maps,
                                      std::span<const Camera> cameras) {
    const int c_img = check_views(maps, cameras);
    DenseFeatureVolume vol{spec, 2 * c_img, {}, {}};
    vol.data.assign(static_cast<std::size_t>(spec.coarse_count()) * vol.channels, 0.0f);
    vol.visible.assign(spec.coarse_count(), 0);
    parallel_for(0, spec.coarse_count(), [&](std::int64_t i) {
        const Vec3 center = voxel_center(spec, {Frame::Occupancy, spec.coarse_coord(i)});
        std::span<float> out(vol.data.data() + i * vol.channels, vol.channels);
        vol.visible[i] = aggregate_at_into(center, maps, cameras, out) ? 1 : 0;
    });
    return vol;
}

} // namespace svol
