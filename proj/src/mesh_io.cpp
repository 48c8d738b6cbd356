// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <limits>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include <Eigen/Geometry>

#include "svol/errors.hpp"
#include "svol/mesh.hpp"
#include "svol/tensorio.hpp"

namespace svol {

void TriangleMesh::validate() const {
    const auto n = static_cast<std::int64_t>(vertices.size());
    for (const auto& f : faces)
        for (const auto i : f)
            if (i < 0 || i >= n)
                throw DomainError("face index " + std::to_string(i) + " out of range");
    if (!normals.empty() && normals.size() != vertices.size())
        throw DomainError("normals must be empty or one per vertex");
}

std::vector<Vec3> area_weighted_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        // cross product length is twice the area, so this is already area-weighted
        const Vec3 n = (b - a).cross(c - a);
        for (const auto i : f)
            acc[i] += n;
    }
    for (auto& n : acc) {
        const double len = n.norm();
        n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    }
    return acc;
}

std::size_t count_boundary_or_nonmanifold_edges(const TriangleMesh& mesh) {
    std::map<std::pair<std::int32_t, std::int32_t>, int> uses;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            auto a = f[e];
            auto b = f[(e + 1) % 3];
            if (a > b)
                std::swap(a, b);
            ++uses[{a, b}];
        }
    }
    return static_cast<std::size_t>(std::count_if(uses.begin(), uses.end(), [](const auto& kv) { return kv.second != 2; }));
}

namespace {

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

PlyType parse_type(const std::string& name) {
    static const std::map<std::string, PlyType> kTypes = {
        {"char", PlyType::Int8},     {"int8", PlyType::Int8},       {"uchar", PlyType::UInt8},
        {"uint8", PlyType::UInt8},   {"short", PlyType::Int16},     {"int16", PlyType::Int16},
        {"ushort", PlyType::UInt16}, {"uint16", PlyType::UInt16},   {"int", PlyType::Int32},
        {"int32", PlyType::Int32},   {"uint", PlyType::UInt32},     {"uint32", PlyType::UInt32},
        {"float", PlyType::Float32}, {"float32", PlyType::Float32}, {"double", PlyType::Float64},
        {"float64", PlyType::Float64}};
    const auto it = kTypes.find(name);
    if (it == kTypes.end())
        throw FormatError("unknown PLY property type '" + name + "'");
    return it->second;
}

std::size_t type_size(PlyType t) {
    switch (t) {
    case PlyType::Int8:
    case PlyType::UInt8:
        return 1;
    case PlyType::Int16:
    case PlyType::UInt16:
        return 2;
    case PlyType::Int32:
    case PlyType::UInt32:
    case PlyType::Float32:
        return 4;
    case PlyType::Float64:
        return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
};

struct Element {
    std::string name;
    std::uint64_t count = 0;
    std::vector<Property> properties;
};

// Reads scalar values from either an ASCII token stream or a little-endian byte stream.
class BodyReader {
  public:
    BodyReader(std::span<const std::byte> body, bool ascii) : body_(body), ascii_(ascii) {}

    double read(PlyType type) {
        if (ascii_)
            return read_ascii();
        const std::size_t n = type_size(type);
        if (pos_ + n > body_.size())
            throw FormatError("truncated PLY body");
        std::array<std::byte, 8> raw{};
        std::memcpy(raw.data(), body_.data() + pos_, n);
        pos_ += n;
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
        switch (type) {
        case PlyType::Int8:
            return static_cast<double>(std::bit_cast<std::int8_t>(raw[0]));
        case PlyType::UInt8:
            return static_cast<double>(std::to_integer<std::uint8_t>(raw[0]));
        case PlyType::Int16:
            return decode<std::int16_t>(raw);
        case PlyType::UInt16:
            return decode<std::uint16_t>(raw);
        case PlyType::Int32:
            return decode<std::int32_t>(raw);
        case PlyType::UInt32:
            return decode<std::uint32_t>(raw);
        case PlyType::Float32:
            return decode<float>(raw);
        case PlyType::Float64:
            return decode<double>(raw);
        }
        return 0.0;
    }

  private:
    template <class T>
    static double decode(const std::array<std::byte, 8>& raw) {
        T v;
        std::memcpy(&v, raw.data(), sizeof(T));
        return static_cast<double>(v);
    }

    double read_ascii() {
        while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(body_[pos_])))
            ++pos_;
        const std::size_t start = pos_;
        while (pos_ < body_.size() && !std::isspace(static_cast<unsigned char>(body_[pos_])))
            ++pos_;
        if (start == pos_)
            throw FormatError("truncated PLY body");
        const char* first = reinterpret_cast<const char*>(body_.data() + start);
        const char* last = reinterpret_cast<const char*>(body_.data() + pos_);
        double v = 0.0;
        const auto res = std::from_chars(first, last, v);
        if (res.ec != std::errc() || res.ptr != last)
            throw FormatError("malformed PLY number '" + std::string(first, last) + "'");
        return v;
    }

    std::span<const std::byte> body_;
    bool ascii_;
    std::size_t pos_ = 0;
};

std::int32_t to_index(double v) {
    if (!(v >= 0.0) || v > static_cast<double>(std::numeric_limits<std::int32_t>::max()) || v != std::floor(v))
        throw FormatError("invalid PLY vertex index");
    return static_cast<std::int32_t>(v);
}

} // namespace

TriangleMesh decode_ply(std::span<const std::byte> bytes) {
    // header: text lines up to and including "end_header"
    std::size_t pos = 0;
    auto next_line = [&]() {
        std::string line;
        while (pos < bytes.size() && bytes[pos] != std::byte{'\n'})
            line.push_back(static_cast<char>(bytes[pos++]));
        if (pos >= bytes.size())
            throw FormatError("truncated PLY header");
        ++pos;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return line;
    };

    if (next_line() != "ply")
        throw FormatError("not a PLY file");
    bool ascii = false;
    bool have_format = false;
    std::vector<Element> elements;
    for (;;) {
        const std::string line = next_line();
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword == "end_header")
            break;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info")
            continue;
        if (keyword == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii")
                ascii = true;
            else if (fmt == "binary_little_endian")
                ascii = false;
            else if (fmt == "binary_big_endian")
                throw UnsupportedFormat("big-endian PLY is not supported");
            else
                throw FormatError("unknown PLY format '" + fmt + "'");
            have_format = true;
        } else if (keyword == "element") {
            Element e;
            if (!(ls >> e.name >> e.count))
                throw FormatError("malformed PLY element line");
            elements.push_back(std::move(e));
        } else if (keyword == "property") {
            if (elements.empty())
                throw FormatError("PLY property before any element");
            Property p;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string count_type, item_type;
                ls >> count_type >> item_type >> p.name;
                p.is_list = true;
                p.count_type = parse_type(count_type);
                p.type = parse_type(item_type);
            } else {
                p.type = parse_type(type);
                ls >> p.name;
            }
            if (p.name.empty())
                throw FormatError("PLY property without a name");
            elements.back().properties.push_back(std::move(p));
        } else {
            throw FormatError("unknown PLY header keyword '" + keyword + "'");
        }
    }
    if (!have_format)
        throw FormatError("PLY header has no format line");

    TriangleMesh mesh;
    BodyReader reader(bytes.subspan(pos), ascii);
    bool seen_vertex = false;
    for (const auto& e : elements) {
        if (e.name == "vertex") {
            seen_vertex = true;
            std::array<int, 6> slot;
            slot.fill(-1);
            const std::array<std::string_view, 6> names = {"x", "y", "z", "nx", "ny", "nz"};
            for (std::size_t i = 0; i < e.properties.size(); ++i)
                for (std::size_t k = 0; k < names.size(); ++k)
                    if (e.properties[i].name == names[k] && !e.properties[i].is_list)
                        slot[k] = static_cast<int>(i);
            if (slot[0] < 0 || slot[1] < 0 || slot[2] < 0)
                throw FormatError("PLY vertex element lacks required x, y, z properties");
            const bool normals = slot[3] >= 0 && slot[4] >= 0 && slot[5] >= 0;
            mesh.vertices.reserve(e.count);
            if (normals)
                mesh.normals.reserve(e.count);
            std::vector<double> row(e.properties.size());
            for (std::uint64_t v = 0; v < e.count; ++v) {
                for (std::size_t i = 0; i < e.properties.size(); ++i) {
                    const auto& p = e.properties[i];
                    if (p.is_list) {
                        const auto n = static_cast<std::uint64_t>(reader.read(p.count_type));
                        for (std::uint64_t j = 0; j < n; ++j)
                            reader.read(p.type);
                    } else {
                        row[i] = reader.read(p.type);
                    }
                }
                mesh.vertices.emplace_back(row[slot[0]], row[slot[1]], row[slot[2]]);
                if (normals)
                    mesh.normals.emplace_back(row[slot[3]], row[slot[4]], row[slot[5]]);
            }
        } else if (e.name == "face") {
            int index_slot = -1;
            for (std::size_t i = 0; i < e.properties.size(); ++i)
                if (e.properties[i].is_list &&
                    (e.properties[i].name == "vertex_indices" || e.properties[i].name == "vertex_index"))
                    index_slot = static_cast<int>(i);
            if (index_slot < 0)
                throw FormatError("PLY face element lacks a vertex_indices list");
            mesh.faces.reserve(e.count);
            std::vector<std::int32_t> poly;
            for (std::uint64_t f = 0; f < e.count; ++f) {
                for (std::size_t i = 0; i < e.properties.size(); ++i) {
                    const auto& p = e.properties[i];
                    if (!p.is_list) {
                        reader.read(p.type);
                        continue;
                    }
                    const auto n = static_cast<std::uint64_t>(reader.read(p.count_type));
                    poly.clear();
                    for (std::uint64_t j = 0; j < n; ++j) {
                        const double v = reader.read(p.type);
                        if (static_cast<int>(i) == index_slot)
                            poly.push_back(to_index(v));
                    }
                    if (static_cast<int>(i) == index_slot) {
                        if (poly.size() < 3)
                            throw FormatError("PLY face with fewer than three vertices");
                        for (std::size_t j = 1; j + 1 < poly.size(); ++j)
                            mesh.faces.push_back({poly[0], poly[j], poly[j + 1]});
                    }
                }
            }
        } else {
            for (std::uint64_t r = 0; r < e.count; ++r)
                for (const auto& p : e.properties) {
                    if (p.is_list) {
                        const auto n = static_cast<std::uint64_t>(reader.read(p.count_type));
                        for (std::uint64_t j = 0; j < n; ++j)
                            reader.read(p.type);
                    } else {
                        reader.read(p.type);
                    }
                }
        }
    }
    if (!seen_vertex)
        throw FormatError("PLY file has no vertex element");
    try {
        mesh.validate();
    } catch (const DomainError& err) {
        throw FormatError(std::string("PLY: ") + err.what());
    }
    return mesh;
}

std::vector<std::byte> encode_ply(const TriangleMesh& mesh, const PlyWriteOptions& options) {
    mesh.validate();
    const bool ascii = options.encoding == PlyEncoding::Ascii;
    const bool f64 = options.precision == PlyPrecision::Float64;
    const char* ftype = f64 ? "double" : "float";
    const bool normals = mesh.has_normals();

    std::ostringstream h;
    h << "ply\nformat " << (ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
    h << "element vertex " << mesh.vertices.size() << '\n';
    h << "property " << ftype << " x\nproperty " << ftype << " y\nproperty " << ftype << " z\n";
    if (normals)
        h << "property " << ftype << " nx\nproperty " << ftype << " ny\nproperty " << ftype << " nz\n";
    h << "element face " << mesh.faces.size() << '\n';
    h << "property list uchar int vertex_indices\nend_header\n";

    std::vector<std::byte> out;
    auto put_text = [&](const std::string& s) {
        for (char c : s)
            out.push_back(static_cast<std::byte>(c));
    };
    put_text(h.str());

    auto put_real = [&](double v, bool last) {
        if (ascii) {
            std::array<char, 64> buf;
            const auto res = f64 ? std::to_chars(buf.data(), buf.data() + buf.size(), v)
                                 : std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(v));
            out.insert(out.end(), reinterpret_cast<const std::byte*>(buf.data()),
                       reinterpret_cast<const std::byte*>(res.ptr));
            out.push_back(static_cast<std::byte>(last ? '\n' : ' '));
            return;
        }
        std::array<std::byte, 8> raw;
        std::size_t n = 0;
        if (f64) {
            std::memcpy(raw.data(), &v, 8);
            n = 8;
        } else {
            const float f = static_cast<float>(v);
            std::memcpy(raw.data(), &f, 4);
            n = 4;
        }
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
        out.insert(out.end(), raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n));
    };

    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        put_real(p.x(), false);
        put_real(p.y(), false);
        put_real(p.z(), !normals);
        if (normals) {
            const Vec3& n = mesh.normals[i];
            put_real(n.x(), false);
            put_real(n.y(), false);
            put_real(n.z(), true);
        }
    }
    for (const auto& f : mesh.faces) {
        if (ascii) {
            put_text("3 " + std::to_string(f[0]) + ' ' + std::to_string(f[1]) + ' ' + std::to_string(f[2]) + '\n');
            continue;
        }
        out.push_back(std::byte{3});
        for (const auto idx : f) {
            std::array<std::byte, 4> raw;
            std::memcpy(raw.data(), &idx, 4);
            if constexpr (std::endian::native == std::endian::big)
                std::reverse(raw.begin(), raw.end());
            out.insert(out.end(), raw.begin(), raw.end());
        }
    }
    return out;
}

void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh, const PlyWriteOptions& options) {
    write_file_bytes(path, encode_ply(mesh, options));
}

TriangleMesh read_ply(const std::filesystem::path& path) { return decode_ply(read_file_bytes(path)); }

} // namespace svol
