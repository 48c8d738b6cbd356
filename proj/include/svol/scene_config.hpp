// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "svol/geometry.hpp"
#include "svol/json_io.hpp"

namespace svol {

/// Bad or missing configuration, flags or upstream files. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDeskCoarseResolution = 32;
inline constexpr int kPaperCoarseResolution = 128;

/// One JSON document drives every command; command-line flags override individual fields.
/// Relative paths are resolved against the directory of the config file.
struct SceneConfig {
    BoundingBox bbox{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
    Index3 coarse_resolution = Index3::Constant(kDeskCoarseResolution);
    int supersample = 4;
    int image_channels = 16; // per view; the volume stores mean and variance, 2 * 16 = 32 channels
    double feature_scale = 1.0;

    double tau = 0.1;
    double gamma = 2.0;
    bool dilation_union = false;

    int n_samples = 64;
    std::string sampling = "stratified"; // or "uniform"
    double alpha = 1.0;
    int pos_enc_bands = 10;

    int tsdf_resolution = 256;
    double tsdf_truncation = 0.0; // <= 0: two fine-voxel edges of grid()
    double virtual_shift = 25.0;  // scene units; 25 mm at millimeter scale

    std::uint64_t seed = 0;

    std::filesystem::path cameras;
    std::filesystem::path features;
    std::filesystem::path logits;
    std::filesystem::path gt_occupancy;
    std::filesystem::path occupancy;
    std::filesystem::path bundle;
    std::filesystem::path weights;

    GridSpec grid() const { return GridSpec(bbox, coarse_resolution, supersample); }

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    /// K = 128 instead of the desk-scale 32.
    void apply_paper_scale() { coarse_resolution = Index3::Constant(kPaperCoarseResolution); }
};

SceneConfig scene_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json scene_config_to_json(const SceneConfig& config);

/// Reads and validates a config file; a missing file is a ConfigError naming the path.
SceneConfig load_scene_config(const std::filesystem::path& path);
void save_scene_config(const std::filesystem::path& path, const SceneConfig& config);

/// Throws ConfigError("missing <what>: <path>") unless the path exists.
void require_file(const std::filesystem::path& path, const std::string& what);

} // namespace svol
