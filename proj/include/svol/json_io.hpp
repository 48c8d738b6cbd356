// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "svol/geometry.hpp"

namespace svol {

using Json = nlohmann::json;

Json bbox_to_json(const BoundingBox& box);
BoundingBox bbox_from_json(const Json& j);

/// {"bbox": {...}, "coarse_resolution": K or [Kx,Ky,Kz], "supersample": s}
Json grid_spec_to_json(const GridSpec& spec);
GridSpec grid_spec_from_json(const Json& j);

/// {"projection": [[4],[4],[4]] or 12 row-major numbers, "width": W, "height": H}
Json camera_to_json(const Camera& camera);
Camera camera_from_json(const Json& j);

/// A camera file holds either one camera object, a bare array of cameras, or {"cameras": [...]}.
std::vector<Camera> read_cameras(const std::filesystem::path& path);
void write_cameras(const std::filesystem::path& path, const std::vector<Camera>& cameras);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

} // namespace svol
