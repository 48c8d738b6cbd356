// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/json_io.hpp"

#include <fstream>

#include "svol/errors.hpp"

namespace svol {

namespace {

Vec3 vec3_from_json(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw FormatError(std::string(what) + " must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

Json bbox_to_json(const BoundingBox& box) {
    const Vec3& lo = box.min_corner();
    const Vec3& hi = box.max_corner();
    return Json{{"min", {lo.x(), lo.y(), lo.z()}}, {"max", {hi.x(), hi.y(), hi.z()}}};
}

BoundingBox bbox_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("min") || !j.contains("max"))
        throw FormatError("bbox needs \"min\" and \"max\"");
    return BoundingBox(vec3_from_json(j.at("min"), "bbox.min"), vec3_from_json(j.at("max"), "bbox.max"));
}

Json grid_spec_to_json(const GridSpec& spec) {
    const Index3 k = spec.coarse_resolution();
    return Json{{"bbox", bbox_to_json(spec.bbox())},
                {"coarse_resolution", {k.x(), k.y(), k.z()}},
                {"supersample", spec.supersample()}};
}

GridSpec grid_spec_from_json(const Json& j) {
    if (!j.contains("bbox") || !j.contains("coarse_resolution"))
        throw FormatError("grid spec needs \"bbox\" and \"coarse_resolution\"");
    const Json& k = j.at("coarse_resolution");
    Index3 res;
    if (k.is_number_integer()) {
        res = Index3::Constant(k.get<int>());
    } else if (k.is_array() && k.size() == 3) {
        res = {k[0].get<int>(), k[1].get<int>(), k[2].get<int>()};
    } else {
        throw FormatError("coarse_resolution must be an integer or a 3-element array");
    }
    return GridSpec(bbox_from_json(j.at("bbox")), res, j.value("supersample", 1));
}

Json camera_to_json(const Camera& camera) {
    Json rows = Json::array();
    for (int r = 0; r < 3; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 4; ++c)
            row.push_back(camera.projection()(r, c));
        rows.push_back(row);
    }
    return Json{{"projection", rows}, {"width", camera.width()}, {"height", camera.height()}};
}

Camera camera_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("projection") || !j.contains("width") || !j.contains("height"))
        throw FormatError("camera needs \"projection\", \"width\" and \"height\"");
    const Json& p = j.at("projection");
    Matrix34 m;
    if (p.is_array() && p.size() == 12) {
        for (int i = 0; i < 12; ++i)
            m(i / 4, i % 4) = p[i].get<double>();
    } else if (p.is_array() && p.size() == 3) {
        for (int r = 0; r < 3; ++r) {
            if (!p[r].is_array() || p[r].size() != 4)
                throw FormatError("camera projection rows must have 4 entries");
            for (int c = 0; c < 4; ++c)
                m(r, c) = p[r][c].get<double>();
        }
    } else {
        throw FormatError("camera projection must be 3x4 (nested or 12 row-major numbers)");
    }
    try {
        return Camera(m, j.at("width").get<int>(), j.at("height").get<int>());
    } catch (const DomainError& e) {
        throw FormatError(std::string("invalid camera: ") + e.what());
    }
}

std::vector<Camera> read_cameras(const std::filesystem::path& path) {
    const Json j = read_json(path);
    const Json* list = &j;
    if (j.is_object() && j.contains("cameras"))
        list = &j.at("cameras");
    std::vector<Camera> out;
    if (list->is_array()) {
        for (const auto& c : *list)
            out.push_back(camera_from_json(c));
    } else {
        out.push_back(camera_from_json(*list));
    }
    return out;
}

void write_cameras(const std::filesystem::path& path, const std::vector<Camera>& cameras) {
    Json list = Json::array();
    for (const auto& c : cameras)
        list.push_back(camera_to_json(c));
    write_json(path, Json{{"cameras", list}});
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace svol
