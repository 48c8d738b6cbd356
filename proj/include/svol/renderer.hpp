// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "svol/features.hpp"
#include "svol/geometry.hpp"
#include "svol/ray_sampling.hpp"
#include "svol/sparse_volume.hpp"
#include "svol/tensorio.hpp"

namespace svol {

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

/// y = W x + b.
struct Affine {
    MatrixX weight; // out x in
    VectorX bias;   // out

    int in_dim() const { return static_cast<int>(weight.cols()); }
    int out_dim() const { return static_cast<int>(weight.rows()); }
    VectorX apply(const VectorX& x) const { return weight * x + bias; }

    static Affine identity(int dim);
};

/// ReLU between layers, logistic sigmoid on the last one.
struct Mlp {
    std::vector<Affine> layers;

    int in_dim() const { return layers.front().in_dim(); }
    int out_dim() const { return layers.back().out_dim(); }
    VectorX apply(const VectorX& x) const;
};

/// Single attention layer over views used to pool projection features. A view's logit is
/// query . (key f + key_bias) / sqrt(A) for an A-dimensional key space.
struct ProjectionAttention {
    MatrixX key;      // A x C_img
    VectorX key_bias; // A
    VectorX query;    // A
};

/// Dimensions of a renderer. The per-sample input is [f_vol (volume_channels), f_proj
/// (projection_channels), positional encoding (6 * pos_enc_bands)].
struct RendererLayout {
    int volume_channels = 0;
    int projection_channels = 0;
    int pos_enc_bands = 10;
    int token_dim = 16;
    int attention_dim = 16;  // D, output of q and k
    int value_dim = 16;      // output of v, input of the color head
    std::vector<int> hidden; // color head hidden widths
    bool identity_occ = true;

    int input_dim() const { return volume_channels + projection_channels + 6 * pos_enc_bands; }
};

struct RendererWeights {
    VectorX token;
    Affine q;             // token_dim -> D
    Affine k;             // D_in -> D
    Affine v;             // D_in -> D_v
    Affine occ_transform; // D_in -> D_in
    Mlp color_head;       // D_v -> ... -> 3
    int pos_enc_bands = 10;
    int volume_channels = 0;
    int projection_channels = 0;
    std::optional<ProjectionAttention> projection_attention;

    int input_dim() const { return static_cast<int>(k.weight.cols()); }
    int attention_dim() const { return static_cast<int>(k.weight.rows()); }

    /// Throws DomainError on inconsistent dimensions or non-finite values.
    void validate() const;
};

/// Deterministic weights drawn uniformly in +-1/sqrt(fan_in).
RendererWeights random_weights(const RendererLayout& layout, std::uint64_t seed);

/// Manifest JSON plus one f64 .svt file per tensor in the same directory.
void write_weights(const std::filesystem::path& manifest, const RendererWeights& weights);
RendererWeights read_weights(const std::filesystem::path& manifest);

/// (sin 2^j pi x, cos 2^j pi x) for j = 0..L-1.
VectorX positional_encoding(double x, int bands);

/// Per component of the box-normalized point (in [-1, 1]), the scalar encoding; length 6L.
VectorX positional_encoding(const Vec3& point, const BoundingBox& bbox, int bands);

/// Pooled projection feature [mean, variance] (2 * C_img values) with its validity flag. Without
/// an attention layer this is meanvar; with one, views are weighted by the attention softmax.
struct ProjectionFeature {
    std::vector<float> values;
    bool valid = false;
};

ProjectionFeature aggregate_projection_feature(const Vec3& point, std::span<const FeatureMap> maps,
                                               std::span<const Camera> cameras,
                                               const std::optional<ProjectionAttention>& attention = std::nullopt);

/// Attention-weighted mean and variance of per-view features (rows of `views`).
ProjectionFeature attention_pool(const MatrixX& views, const ProjectionAttention& attention);

/// Per-sample inputs f^r_i as rows, with their ray parameters.
struct RaySampleFeatures {
    std::vector<double> ts;
    MatrixX fr; // N x D_in
};

RaySampleFeatures gather_features(const RaySampleBatch& batch, const SparseFeatureVolume& volume,
                                  std::span<const FeatureMap> maps, std::span<const Camera> cameras,
                                  const RendererWeights& weights);

struct RenderOutput {
    Vec3 color = Vec3::Zero();
    double depth = 0.0; // ray parameter t
    VectorX color_attention;
    VectorX depth_attention;
    bool hit = false;
};

/// Generalized volume rendering of one ray. Zero samples give the background output (hit = false).
RenderOutput render_ray(const RaySampleFeatures& feats, const RendererWeights& weights);

struct LossTerms {
    double total = 0.0;
    double color = 0.0;
    double depth = 0.0;
};

/// Mean L2 color error over all rays plus alpha times the mean absolute depth error over the
/// rays that carry ground-truth depth (zero when none do).
LossTerms loss(std::span<const RenderOutput> rendered, std::span<const Vec3> gt_color,
               std::span<const std::optional<double>> gt_depth, double alpha);

struct RenderFixture {
    std::vector<RaySampleFeatures> rays;
    std::vector<Vec3> gt_color;
    std::vector<std::optional<double>> gt_depth;
    double alpha = 1.0;
};

/// Gradient of the loss with respect to the v map and the color head, in the layout of
/// flatten_trainable().
VectorX loss_gradient(const RendererWeights& weights, const RenderFixture& fixture);

/// v.weight, v.bias, then each color head layer's weight and bias, column-major.
VectorX flatten_trainable(const RendererWeights& weights);
void unflatten_trainable(RendererWeights& weights, const VectorX& params);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::size_t parameters = 0;
    std::size_t worst_index = 0;
};

/// Analytic gradient against central differences with step epsilon. Relative error per parameter
/// is |a - n| / max(|a|, |n|, 1e-6). Throws DomainError on a non-finite gradient.
GradCheckReport grad_check(const RendererWeights& weights, const RenderFixture& fixture, double epsilon = 1e-4);

struct RenderOptions {
    int n_samples = 64;
    SamplingMode mode = SamplingMode::stratified(0);
};

/// Depth (z-depth along the principal axis, invalid on misses) and RGB in [0,1], row-major.
struct RenderedView {
    DepthMap depth;
    std::vector<float> rgb;
};

RenderedView render_view(const Camera& camera, const SparseFeatureVolume& volume, std::span<const FeatureMap> maps,
                         std::span<const Camera> cameras, const RendererWeights& weights, const RenderOptions& options);

} // namespace svol
