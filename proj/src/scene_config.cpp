// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/scene_config.hpp"

#include <cmath>

#include "svol/errors.hpp"

namespace svol {

namespace {

std::filesystem::path resolve(const Json& j, const char* key, const std::filesystem::path& base) {
    if (!j.contains(key) || j.at(key).is_null())
        return {};
    std::filesystem::path p = j.at(key).get<std::string>();
    if (p.is_relative() && !base.empty())
        p = base / p;
    return p;
}

} // namespace

void SceneConfig::validate() const {
    if ((coarse_resolution.array() < 1).any())
        throw ConfigError("coarse_resolution must be positive");
    if (supersample < 1)
        throw ConfigError("supersample must be at least 1");
    if (image_channels < 1)
        throw ConfigError("image_channels must be at least 1");
    if (!(feature_scale > 0.0 && feature_scale <= 1.0))
        throw ConfigError("feature_scale must lie in (0, 1]");
    if (!(tau > 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in (0, 1]");
    if (!(gamma >= 0.0))
        throw ConfigError("gamma must be non-negative");
    if (n_samples < 1)
        throw ConfigError("n_samples must be at least 1");
    if (sampling != "stratified" && sampling != "uniform")
        throw ConfigError("sampling must be \"stratified\" or \"uniform\"");
    if (!(alpha >= 0.0))
        throw ConfigError("alpha must be non-negative");
    if (pos_enc_bands < 0)
        throw ConfigError("pos_enc_bands must be non-negative");
    if (tsdf_resolution < 2)
        throw ConfigError("tsdf_resolution must be at least 2");
    if (!std::isfinite(tsdf_truncation) || !std::isfinite(virtual_shift))
        throw ConfigError("tsdf_truncation and virtual_shift must be finite");
}

SceneConfig scene_config_from_json(const Json& j, const std::filesystem::path& base) {
    SceneConfig c;
    try {
        if (j.contains("bbox"))
            c.bbox = bbox_from_json(j.at("bbox"));
        if (j.contains("coarse_resolution")) {
            const Json& k = j.at("coarse_resolution");
            if (k.is_number_integer())
                c.coarse_resolution = Index3::Constant(k.get<int>());
            else if (k.is_array() && k.size() == 3)
                c.coarse_resolution = Index3(k[0].get<int>(), k[1].get<int>(), k[2].get<int>());
            else
                throw ConfigError("coarse_resolution must be an integer or a 3-element array");
        }
        c.supersample = j.value("supersample", c.supersample);
        c.image_channels = j.value("image_channels", c.image_channels);
        c.feature_scale = j.value("feature_scale", c.feature_scale);
        c.tau = j.value("tau", c.tau);
        c.gamma = j.value("gamma", c.gamma);
        c.dilation_union = j.value("dilation_union", c.dilation_union);
        c.n_samples = j.value("n_samples", c.n_samples);
        c.sampling = j.value("sampling", c.sampling);
        c.alpha = j.value("alpha", c.alpha);
        c.pos_enc_bands = j.value("pos_enc_bands", c.pos_enc_bands);
        c.tsdf_resolution = j.value("tsdf_resolution", c.tsdf_resolution);
        c.tsdf_truncation = j.value("tsdf_truncation", c.tsdf_truncation);
        c.virtual_shift = j.value("virtual_shift", c.virtual_shift);
        c.seed = j.value("seed", c.seed);
        c.cameras = resolve(j, "cameras", base);
        c.features = resolve(j, "features", base);
        c.logits = resolve(j, "logits", base);
        c.gt_occupancy = resolve(j, "gt_occupancy", base);
        c.occupancy = resolve(j, "occupancy", base);
        c.bundle = resolve(j, "bundle", base);
        c.weights = resolve(j, "weights", base);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("scene config: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(std::string("scene config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("scene config: ") + e.what());
    }
    c.validate();
    return c;
}

Json scene_config_to_json(const SceneConfig& c) {
    Json j;
    j["bbox"] = bbox_to_json(c.bbox);
    j["coarse_resolution"] = {c.coarse_resolution.x(), c.coarse_resolution.y(), c.coarse_resolution.z()};
    j["supersample"] = c.supersample;
    j["image_channels"] = c.image_channels;
    j["feature_scale"] = c.feature_scale;
    j["tau"] = c.tau;
    j["gamma"] = c.gamma;
    j["dilation_union"] = c.dilation_union;
    j["n_samples"] = c.n_samples;
    j["sampling"] = c.sampling;
    j["alpha"] = c.alpha;
    j["pos_enc_bands"] = c.pos_enc_bands;
    j["tsdf_resolution"] = c.tsdf_resolution;
    j["tsdf_truncation"] = c.tsdf_truncation;
    j["virtual_shift"] = c.virtual_shift;
    j["seed"] = c.seed;
    auto put = [&](const char* key, const std::filesystem::path& p) {
        if (!p.empty())
            j[key] = p.generic_string();
    };
    put("cameras", c.cameras);
    put("features", c.features);
    put("logits", c.logits);
    put("gt_occupancy", c.gt_occupancy);
    put("occupancy", c.occupancy);
    put("bundle", c.bundle);
    put("weights", c.weights);
    return j;
}

SceneConfig load_scene_config(const std::filesystem::path& path) {
    require_file(path, "scene config");
    Json j;
    try {
        j = read_json(path);
    } catch (const FormatError& e) {
        throw ConfigError(e.what());
    }
    return scene_config_from_json(j, path.parent_path());
}

void save_scene_config(const std::filesystem::path& path, const SceneConfig& config) {
    write_json(path, scene_config_to_json(config));
}

void require_file(const std::filesystem::path& path, const std::string& what) {
    if (path.empty())
        throw ConfigError("no " + what + " given");
    if (!std::filesystem::exists(path))
        throw ConfigError("missing " + what + ": " + path.string());
}

} // namespace svol
