// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "svol/errors.hpp"
#include "svol/mesh.hpp"

namespace svol {

// ---------------------------------------------------------------------------------------------
// .svt tensor files
//
//   bytes 0..15   "SVOLTNSR" followed by eight NUL bytes
//   u32           dtype tag (1 = f32, 2 = f64, 3 = u8, 4 = i32)
//   u32           rank
//   u64 * rank    dims, outermost first
//   payload       row-major elements
//
// Every multi-byte field is little-endian regardless of the host.
// ---------------------------------------------------------------------------------------------

enum class DType : std::uint32_t { F32 = 1, F64 = 2, U8 = 3, I32 = 4 };

std::size_t dtype_size(DType dtype);
const char* dtype_name(DType dtype);

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() { return DType::F32; }
template <>
constexpr DType dtype_of<double>() { return DType::F64; }
template <>
constexpr DType dtype_of<std::uint8_t>() { return DType::U8; }
template <>
constexpr DType dtype_of<std::int32_t>() { return DType::I32; }

using Shape = std::vector<std::uint64_t>;

/// Typed n-d array whose payload is kept in its on-disk (little-endian) byte form.
class Tensor {
  public:
    Tensor(DType dtype, Shape shape);

    template <class T>
    static Tensor from(Shape shape, std::span<const T> values);

    DType dtype() const { return dtype_; }
    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::uint64_t element_count() const;
    std::span<const std::byte> payload() const { return payload_; }

    /// Decoded elements. Throws FormatError if T does not match the stored dtype.
    template <class T>
    std::vector<T> values() const;

    bool operator==(const Tensor& other) const = default;

  private:
    Tensor(DType dtype, Shape shape, std::vector<std::byte> payload);
    friend Tensor decode_tensor(std::span<const std::byte> bytes);

    void store(const void* host_values, std::size_t count);
    void load(void* host_values) const;

    DType dtype_;
    Shape shape_;
    std::vector<std::byte> payload_;
};

std::vector<std::byte> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------
// Depth maps and PFM
// ---------------------------------------------------------------------------------------------

/// Per-pixel depth in scene units, row 0 at the top. Zero, negative or non-finite input depths
/// are invalid; invalid pixels store 0.
class DepthMap {
  public:
    DepthMap(int width, int height);
    DepthMap(int width, int height, std::vector<float> raw);

    int width() const { return width_; }
    int height() const { return height_; }

    float at(int x, int y) const { return depth_[index(x, y)]; }
    bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
    void set(int x, int y, float depth);
    void invalidate(int x, int y);

    std::span<const float> depths() const { return depth_; }
    std::size_t valid_count() const;

    bool operator==(const DepthMap& other) const = default;

  private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_;
    int height_;
    std::vector<float> depth_;
    std::vector<std::uint8_t> valid_;
};

/// Grayscale PFM, written little-endian ("Pf\n<w> <h>\n-1\n", rows bottom to top).
std::vector<std::byte> encode_pfm(const DepthMap& depth);
DepthMap decode_pfm(std::span<const std::byte> bytes);
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_pfm(const std::filesystem::path& path);

/// Binary 8-bit RGB PPM; `rgb` holds width*height*3 values in [0,1], row 0 at the top.
void write_ppm(const std::filesystem::path& path, int width, int height, std::span<const float> rgb);

// ---------------------------------------------------------------------------------------------
// PLY
// ---------------------------------------------------------------------------------------------

enum class PlyEncoding { Ascii, BinaryLittleEndian };
enum class PlyPrecision { Float32, Float64 };

struct PlyWriteOptions {
    PlyEncoding encoding = PlyEncoding::BinaryLittleEndian;
    PlyPrecision precision = PlyPrecision::Float32;
};

/// Vertices with x,y,z and optional nx,ny,nz; faces as a "vertex_indices" (or "vertex_index") list.
/// Polygons with more than three corners are fan-triangulated on read. Unrecognized properties and
/// elements are skipped.
std::vector<std::byte> encode_ply(const TriangleMesh& mesh, const PlyWriteOptions& options = {});
TriangleMesh decode_ply(std::span<const std::byte> bytes);
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh, const PlyWriteOptions& options = {});
TriangleMesh read_ply(const std::filesystem::path& path);

// ---------------------------------------------------------------------------------------------

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

template <class T>
Tensor Tensor::from(Shape shape, std::span<const T> values) {
    Tensor t(dtype_of<T>(), std::move(shape));
    if (values.size() != t.element_count())
        throw DomainError("tensor value count does not match shape");
    t.store(values.data(), values.size());
    return t;
}

template <class T>
std::vector<T> Tensor::values() const {
    if (dtype_of<T>() != dtype_)
        throw FormatError(std::string("tensor holds ") + dtype_name(dtype_) + ", requested " + dtype_name(dtype_of<T>()));
    std::vector<T> out(element_count());
    load(out.data());
    return out;
}

} // namespace svol
