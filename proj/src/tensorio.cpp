// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/tensorio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace svol {

namespace {

constexpr char kMagic[16] = {'S', 'V', 'O', 'L', 'T', 'N', 'S', 'R', 0, 0, 0, 0, 0, 0, 0, 0};
constexpr std::size_t kMaxRank = 16;

template <class T>
void append_le(std::vector<std::byte>& out, T value) {
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(raw.begin(), raw.end());
    out.insert(out.end(), raw.begin(), raw.end());
}

template <class T>
T read_le(std::span<const std::byte> bytes, std::size_t offset) {
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
}

bool checked_count(const Shape& shape, std::size_t elem_size, std::uint64_t& count, std::uint64_t& bytes) {
    std::uint64_t n = 1;
    for (const auto d : shape) {
        if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
            return false;
        n *= d;
    }
    if (n > std::numeric_limits<std::uint64_t>::max() / elem_size)
        return false;
    count = n;
    bytes = n * elem_size;
    return true;
}

bool valid_dtype(std::uint32_t tag) { return tag >= 1 && tag <= 4; }

// Swaps each element in place between host and little-endian order.
void swap_elements(std::byte* data, std::size_t count, std::size_t elem_size) {
    if constexpr (std::endian::native == std::endian::little)
        return;
    for (std::size_t i = 0; i < count; ++i)
        std::reverse(data + i * elem_size, data + (i + 1) * elem_size);
}

} // namespace

std::size_t dtype_size(DType dtype) {
    switch (dtype) {
    case DType::F32:
        return 4;
    case DType::F64:
        return 8;
    case DType::U8:
        return 1;
    case DType::I32:
        return 4;
    }
    throw FormatError("unknown dtype");
}

const char* dtype_name(DType dtype) {
    switch (dtype) {
    case DType::F32:
        return "f32";
    case DType::F64:
        return "f64";
    case DType::U8:
        return "u8";
    case DType::I32:
        return "i32";
    }
    return "unknown";
}

Tensor::Tensor(DType dtype, Shape shape) : dtype_(dtype), shape_(std::move(shape)) {
    std::uint64_t count = 0, bytes = 0;
    if (shape_.size() > kMaxRank || !checked_count(shape_, dtype_size(dtype_), count, bytes) ||
        bytes > std::numeric_limits<std::size_t>::max())
        throw DomainError("tensor shape overflows");
    payload_.assign(static_cast<std::size_t>(bytes), std::byte{0});
}

Tensor::Tensor(DType dtype, Shape shape, std::vector<std::byte> payload)
    : dtype_(dtype), shape_(std::move(shape)), payload_(std::move(payload)) {}

std::uint64_t Tensor::element_count() const { return payload_.size() / dtype_size(dtype_); }

void Tensor::store(const void* host_values, std::size_t count) {
    std::memcpy(payload_.data(), host_values, count * dtype_size(dtype_));
    swap_elements(payload_.data(), count, dtype_size(dtype_));
}

void Tensor::load(void* host_values) const {
    std::memcpy(host_values, payload_.data(), payload_.size());
    swap_elements(static_cast<std::byte*>(host_values), element_count(), dtype_size(dtype_));
}

std::vector<std::byte> encode_tensor(const Tensor& tensor) {
    std::vector<std::byte> out;
    out.reserve(16 + 8 + 8 * tensor.rank() + tensor.payload().size());
    for (char c : kMagic)
        out.push_back(static_cast<std::byte>(c));
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dtype()));
    append_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (const auto d : tensor.shape())
        append_le<std::uint64_t>(out, d);
    out.insert(out.end(), tensor.payload().begin(), tensor.payload().end());
    return out;
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
    if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 16) != 0)
        throw FormatError("not an .svt tensor (bad magic)");
    const auto tag = read_le<std::uint32_t>(bytes, 16);
    const auto rank = read_le<std::uint32_t>(bytes, 20);
    if (!valid_dtype(tag))
        throw FormatError("unknown .svt dtype tag " + std::to_string(tag));
    if (rank > kMaxRank)
        throw FormatError("implausible .svt rank " + std::to_string(rank));
    const std::size_t header = 24 + 8 * std::size_t{rank};
    if (bytes.size() < header)
        throw FormatError("truncated .svt header");
    Shape shape(rank);
    for (std::uint32_t i = 0; i < rank; ++i)
        shape[i] = read_le<std::uint64_t>(bytes, 24 + 8 * i);
    const auto dtype = static_cast<DType>(tag);
    std::uint64_t count = 0, payload_bytes = 0;
    if (!checked_count(shape, dtype_size(dtype), count, payload_bytes))
        throw FormatError(".svt shape overflows");
    const std::uint64_t available = bytes.size() - header;
    if (available < payload_bytes)
        throw FormatError("truncated .svt payload: expected " + std::to_string(payload_bytes) + " bytes, found " +
                          std::to_string(available));
    if (available > payload_bytes)
        throw FormatError(".svt payload length does not match dtype and shape: expected " +
                          std::to_string(payload_bytes) + " bytes, found " + std::to_string(available));
    std::vector<std::byte> payload(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return Tensor(dtype, std::move(shape), std::move(payload));
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    write_file_bytes(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(raw.size());
    std::memcpy(out.data(), raw.data(), raw.size());
    return out;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("short write to " + path.string());
}

// ---------------------------------------------------------------------------------------------

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
        throw DomainError("depth map size must be positive");
    depth_.assign(static_cast<std::size_t>(width) * height, 0.0f);
    valid_.assign(depth_.size(), 0);
}

DepthMap::DepthMap(int width, int height, std::vector<float> raw) : DepthMap(width, height) {
    if (raw.size() != depth_.size())
        throw DomainError("depth map value count does not match its size");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            set(x, y, raw[index(x, y)]);
}

void DepthMap::set(int x, int y, float depth) {
    const auto i = index(x, y);
    if (std::isfinite(depth) && depth > 0.0f) {
        depth_[i] = depth;
        valid_[i] = 1;
    } else {
        depth_[i] = 0.0f;
        valid_[i] = 0;
    }
}

void DepthMap::invalidate(int x, int y) { set(x, y, 0.0f); }

std::size_t DepthMap::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

std::vector<std::byte> encode_pfm(const DepthMap& depth) {
    std::ostringstream header;
    header << "Pf\n" << depth.width() << ' ' << depth.height() << "\n-1\n";
    const std::string h = header.str();
    std::vector<std::byte> out;
    out.reserve(h.size() + 4 * depth.depths().size());
    for (char c : h)
        out.push_back(static_cast<std::byte>(c));
    for (int y = depth.height() - 1; y >= 0; --y)
        for (int x = 0; x < depth.width(); ++x)
            append_le<float>(out, depth.valid(x, y) ? depth.at(x, y) : 0.0f);
    return out;
}

DepthMap decode_pfm(std::span<const std::byte> bytes) {
    std::size_t pos = 0;
    auto next_token = [&]() {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])))
            ++pos;
        std::string token;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
            token.push_back(static_cast<char>(bytes[pos++]));
        if (token.empty())
            throw FormatError("truncated PFM header");
        return token;
    };
    const std::string kind = next_token();
    if (kind == "PF")
        throw UnsupportedFormat("color PFM is not supported; depth maps must be grayscale (Pf)");
    if (kind != "Pf")
        throw FormatError("not a PFM file");
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token());
        height = std::stoi(next_token());
        scale = std::stod(next_token());
    } catch (const std::logic_error&) {
        throw FormatError("malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0)
        throw FormatError("malformed PFM header");
    ++pos; // single whitespace byte ends the header
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (pos > bytes.size() || bytes.size() - pos < 4 * count)
        throw FormatError("truncated PFM payload");
    const bool little = scale < 0.0;
    DepthMap out(width, height);
    for (int row = 0; row < height; ++row) {
        const int y = height - 1 - row;
        for (int x = 0; x < width; ++x) {
            std::array<std::byte, 4> raw;
            std::memcpy(raw.data(), bytes.data() + pos, 4);
            pos += 4;
            if (little != (std::endian::native == std::endian::little))
                std::reverse(raw.begin(), raw.end());
            float v;
            std::memcpy(&v, raw.data(), 4);
            out.set(x, y, v);
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path& path, const DepthMap& depth) { write_file_bytes(path, encode_pfm(depth)); }

DepthMap read_pfm(const std::filesystem::path& path) { return decode_pfm(read_file_bytes(path)); }

void write_ppm(const std::filesystem::path& path, int width, int height, std::span<const float> rgb) {
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
        throw DomainError("PPM buffer size does not match image size");
    std::ostringstream header;
    header << "P6\n" << width << ' ' << height << "\n255\n";
    const std::string h = header.str();
    std::vector<std::byte> out;
    out.reserve(h.size() + rgb.size());
    for (char c : h)
        out.push_back(static_cast<std::byte>(c));
    for (const float v : rgb) {
        const float c = std::isfinite(v) ? std::clamp(v, 0.0f, 1.0f) : 0.0f;
        out.push_back(static_cast<std::byte>(static_cast<int>(std::lround(c * 255.0f))));
    }
    write_file_bytes(path, out);
}

} // namespace svol
