// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "svol/features.hpp"
#include "svol/geometry.hpp"
#include "svol/huge_pages.hpp"
#include "svol/occupancy.hpp"

namespace svol {

/// Dense K^3 table from occupancy coordinates to mini-volume indices; -1 marks an empty voxel
/// that resolves to the dummy (zero) feature. Occupied voxels are numbered 0..N-1 in the
/// GridSpec linear order (x-major, z fastest).
class LookupTable {
  public:
    static constexpr std::int32_t kEmpty = -1;

    explicit LookupTable(const GridSpec& spec);
    LookupTable(const GridSpec& spec, const std::vector<std::int32_t>& table);

    const GridSpec& spec() const { return spec_; }
    std::int32_t operator[](std::int64_t coarse_index) const { return table_[coarse_index]; }
    std::int32_t at(const Index3& v) const { return table_[spec_.coarse_index(v)]; }
    std::int32_t occupied_count() const { return count_; }
    std::span<const std::int32_t> entries() const { return table_; }

    /// Coarse coordinate of mini-volume n.
    Index3 coord_of(std::int32_t n) const { return spec_.coarse_coord(inverse_[n]); }

    OccupancyField occupancy() const;

  private:
    GridSpec spec_;
    HugeVector<std::int32_t> table_;
    std::vector<std::int64_t> inverse_;
    std::int32_t count_ = 0;
};

LookupTable build_lookup(const OccupancyField& occ);

struct QueryResult {
    std::vector<float> feature;
    /// True when all eight interpolation vertices resolved to occupied mini-volumes.
    bool inside = false;
};

/// Supersampled sparse feature volume: N mini-volumes of C channels by s^3 fine voxels.
///
/// The exchange layout (constructor, minivolumes(), bundle files) is [N][C][s^3] with local
/// fine-voxel index (lx*s + ly)*s + lz. In memory the channels of one fine voxel are stored
/// together, [N][s^3][C], so an interpolation vertex is a single contiguous read.
class SparseFeatureVolume {
  public:
    /// `minivolumes` in [N][C][s^3] order.
    SparseFeatureVolume(LookupTable lookup, int channels, std::vector<float> minivolumes);

    const GridSpec& spec() const { return lookup_.spec(); }
    const LookupTable& lookup() const { return lookup_; }
    int channels() const { return channels_; }
    std::int32_t minivolume_count() const { return lookup_.occupied_count(); }
    std::size_t scalar_count() const { return payload_.size(); }

    /// Copy of the payload in [N][C][s^3] order.
    std::vector<float> minivolumes() const;

    float feature(std::int32_t n, int c, std::int64_t local) const {
        return payload_[(static_cast<std::size_t>(n) * local_count_ + local) * channels_ + c];
    }

    /// Trilinear interpolation over the lattice of fine-voxel centers. Each of the eight
    /// vertices resolves through the lookup table independently; empty ones contribute zeros.
    /// Points within half a fine voxel of the box faces clamp to the outermost vertex layer.
    /// Points outside the box return zeros with inside = false.
    QueryResult query(const Vec3& point) const;

    /// Allocation-free form of query. `out` must hold channels() values.
    bool query_into(const Vec3& point, std::span<float> out) const;

    bool operator==(const SparseFeatureVolume& other) const;

  private:
    LookupTable lookup_;
    int channels_;
    std::int64_t local_count_;
    HugeVector<float> payload_; // [N][s^3][C]
    std::vector<float> zeros_;  // dummy feature for empty voxels
    // cached lattice parameters for query
    Vec3 origin_;
    Vec3 inv_edge_;
    Index3 fine_res_;
    int s_;
};

/// Samples MeanVar features at every fine-voxel center of every occupied coarse voxel.
SparseFeatureVolume build_sparse_volume(const OccupancyField& occ, std::span<const FeatureMap> maps,
                                        std::span<const Camera> cameras);

/// Fine-resolution dense grid, voxel-major: data[global_index * channels + c] with the global
/// index taken over (sK)^3 in x-major order.
struct DenseFineGrid {
    Index3 resolution;
    int channels = 0;
    std::vector<float> data;

    std::int64_t index(const Index3& g) const {
        return (std::int64_t{g.x()} * resolution.y() + g.y()) * resolution.z() + g.z();
    }
};

inline constexpr std::uint64_t kDefaultDensifyBudget = 1ull << 30;

/// Copies occupied fine voxels into a dense (sK)^3 x C grid, zeros elsewhere. Throws
/// BudgetExceeded when the grid would need more than `budget_bytes`.
DenseFineGrid densify(const SparseFeatureVolume& vol, std::uint64_t budget_bytes = kDefaultDensifyBudget);

/// Inverse of densify for a given occupancy: gathers the fine voxels of each occupied coarse voxel.
SparseFeatureVolume sparsify(const DenseFineGrid& grid, const OccupancyField& occ);

struct MemoryReport {
    std::uint64_t payload_bytes = 0;        // N * C * s^3 * 4
    std::uint64_t lookup_bytes = 0;         // K^3 * 4
    std::uint64_t sparse_bytes = 0;         // payload + lookup
    std::uint64_t dense_equivalent_bytes = 0; // (sK)^3 * C * 4
    double ratio = 0.0;                     // dense / sparse
    double payload_ratio = 0.0;             // dense / payload (inf when N = 0)
};

MemoryReport memory_report(const SparseFeatureVolume& vol);

/// The same arithmetic for a hypothetical volume with `occupied` mini-volumes.
MemoryReport memory_estimate(const GridSpec& spec, int channels, std::int64_t occupied);

/// Bundle directory: spec.json, lookup.svt ([Kx,Ky,Kz] i32), minivolumes.svt ([N,C,s^3] f32).
void write_bundle(const std::filesystem::path& dir, const SparseFeatureVolume& vol);
SparseFeatureVolume read_bundle(const std::filesystem::path& dir);

} // namespace svol
