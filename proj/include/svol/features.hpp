// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "svol/geometry.hpp"
#include "svol/tensorio.hpp"

namespace svol {

/// C_img x H x W image feature map. `scale` is the feature-map resolution relative to the image
/// its camera describes (0.5 for a half-resolution map).
class FeatureMap {
  public:
    FeatureMap(int channels, int height, int width, std::vector<float> data, double scale = 1.0);

    int channels() const { return channels_; }
    int height() const { return height_; }
    int width() const { return width_; }
    double scale() const { return scale_; }
    float at(int c, int y, int x) const {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    std::span<const float> data() const { return data_; }

  private:
    int channels_;
    int height_;
    int width_;
    double scale_;
    std::vector<float> data_;
};

/// Splits an [M, C_img, H, W] f32 tensor into M maps.
std::vector<FeatureMap> feature_maps_from_tensor(const Tensor& tensor, double scale = 1.0);

/// Bilinear sample of the map at the point's projection, with pixel centers at integer
/// coordinates. Image coordinates map to feature coordinates by (u + 0.5) * scale - 0.5.
/// Returns false (leaving `out` untouched) when the point is behind the camera or projects
/// outside the map footprint [-0.5, W-0.5) x [-0.5, H-0.5).
bool sample_feature_into(const FeatureMap& map, const Camera& camera, const Vec3& point, std::span<float> out);
std::optional<std::vector<float>> sample_feature(const FeatureMap& map, const Camera& camera, const Vec3& point);

/// Per-channel population mean and variance over the views that saw the point.
struct AggregatedFeature {
    std::vector<float> mean;
    std::vector<float> variance;
    bool valid = false; // false when no view saw the point; mean and variance are then zero

    int image_channels() const { return static_cast<int>(mean.size()); }
    /// [mean..., variance...], length 2 * C_img.
    std::vector<float> concatenated() const;
};

AggregatedFeature meanvar(std::span<const std::optional<std::vector<float>>> views, int image_channels);

/// Samples every map at the point and aggregates with meanvar. Writes 2*C_img values to `out`
/// (zeros when no view saw the point) and returns whether any view contributed.
bool aggregate_at_into(const Vec3& point, std::span<const FeatureMap> maps, std::span<const Camera> cameras,
                       std::span<float> out);

/// Coarse-voxel feature grid, voxel-major: data[voxel * channels + c].
struct DenseFeatureVolume {
    GridSpec spec;
    int channels = 0;
    std::vector<float> data;
    std::vector<std::uint8_t> visible;

    std::span<const float> at(std::int64_t voxel) const {
        return std::span<const float>(data).subspan(static_cast<std::size_t>(voxel) * channels, channels);
    }
};

DenseFeatureVolume build_dense_volume(const GridSpec& spec, std::span<const FeatureMap> maps,
                                      std::span<const Camera> cameras);

/// Checks that maps and cameras are paired and share a channel count; returns C_img.
int check_views(std::span<const FeatureMap> maps, std::span<const Camera> cameras);

} // namespace svol
