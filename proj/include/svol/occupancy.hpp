// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svol/geometry.hpp"
#include "svol/tensorio.hpp"

namespace svol {

enum class OccupancyKind { Probability, Binary };

/// Dense K^3 field over the coarse grid of a GridSpec. Probability fields hold values in [0,1];
/// binary fields hold exactly 0 or 1. Values use the GridSpec linear order (x-major, z fastest).
class OccupancyField {
  public:
    static OccupancyField probability(const GridSpec& spec, std::vector<float> values);
    static OccupancyField binary(const GridSpec& spec, std::vector<std::uint8_t> values);
    static OccupancyField empty(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    OccupancyKind kind() const { return kind_; }
    std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }

    float value(std::int64_t index) const { return values_[index]; }
    float value(const Index3& v) const { return values_[spec_.coarse_index(v)]; }
    bool occupied(std::int64_t index) const { return values_[index] != 0.0f; }
    bool occupied(const Index3& v) const { return occupied(spec_.coarse_index(v)); }
    std::span<const float> values() const { return values_; }

    std::int64_t occupied_count() const;

  private:
    OccupancyField(const GridSpec& spec, OccupancyKind kind, std::vector<float> values);

    GridSpec spec_;
    OccupancyKind kind_;
    std::vector<float> values_;
};

struct OccupancyMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double space_efficiency = 0.0;
    std::int64_t true_positives = 0;
    std::int64_t false_positives = 0;
    std::int64_t false_negatives = 0;
};

/// Ground-truth occupancy: a voxel is occupied iff at least one valid depth pixel, unprojected
/// through its view's camera at the pixel center, lands inside it. Points outside the box are dropped.
OccupancyField gt_occupancy(const GridSpec& spec, std::span<const DepthMap> depth_maps, std::span<const Camera> cameras);

/// Probability clamp applied before the logarithm.
inline constexpr double kFocalEpsilon = 1e-7;

/// Focal loss -sum (1-p)^gamma log p with p = O where gt = 1 and p = 1-O where gt = 0.
double focal_loss(const OccupancyField& pred, const OccupancyField& gt, double gamma);

/// 1 where the probability is >= tau. tau must lie in (0, 1].
OccupancyField binarize(const OccupancyField& pred, double tau);

struct DilationOptions {
    /// OR the result with the input so isolated voxels are never removed.
    bool union_with_input = false;
};

/// 3x3x3 box count with zero padding; a voxel is kept when the count reaches 27 * 0.1 (count >= 3).
OccupancyField dilate(const OccupancyField& binary, const DilationOptions& options = {});

/// Count threshold used by dilate.
inline constexpr double kDilationThreshold = 27 * 0.1;

OccupancyMetrics occupancy_metrics(const OccupancyField& pred, const OccupancyField& gt);

/// Binary fields serialize as u8 [Kx,Ky,Kz]; probability fields as f32.
Tensor to_tensor(const OccupancyField& field);

/// u8 tensors load as binary fields, f32/f64 tensors as probabilities (values must lie in [0,1]).
OccupancyField occupancy_from_tensor(const GridSpec& spec, const Tensor& tensor);

/// Applies the logistic function to a tensor of logits.
OccupancyField probabilities_from_logits(const GridSpec& spec, const Tensor& logits);

} // namespace svol
