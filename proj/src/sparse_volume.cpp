// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/sparse_volume.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svol/errors.hpp"
#include "svol/json_io.hpp"
#include "svol/parallel.hpp"
#include "svol/tensorio.hpp"

namespace svol {

LookupTable::LookupTable(const GridSpec& spec)
    : spec_(spec), table_(spec.coarse_count(), kEmpty) {}

LookupTable::LookupTable(const GridSpec& spec, const std::vector<std::int32_t>& table)
    : spec_(spec), table_(table.begin(), table.end()) {
    if (static_cast<std::int64_t>(table_.size()) != spec_.coarse_count())
        throw DomainError("lookup table size does not match the coarse grid");
    const auto n = std::count_if(table_.begin(), table_.end(), [](std::int32_t v) { return v != kEmpty; });
    if (n > std::numeric_limits<std::int32_t>::max())
        throw DomainError("too many occupied voxels");
    count_ = static_cast<std::int32_t>(n);
    inverse_.assign(count_, -1);
    for (std::size_t i = 0; i < table_.size(); ++i) {
        const std::int32_t v = table_[i];
        if (v == kEmpty)
            continue;
        if (v < 0 || v >= count_ || inverse_[v] != -1)
            throw DomainError("lookup table entries must number the occupied voxels 0..N-1 exactly once");
        inverse_[v] = static_cast<std::int64_t>(i);
    }
}

OccupancyField LookupTable::occupancy() const {
    std::vector<std::uint8_t> occ(table_.size());
    for (std::size_t i = 0; i < table_.size(); ++i)
        occ[i] = table_[i] != kEmpty ? 1 : 0;
    return OccupancyField::binary(spec_, std::move(occ));
}

LookupTable build_lookup(const OccupancyField& occ) {
    if (occ.kind() != OccupancyKind::Binary)
        throw DomainError("lookup tables are built from binary occupancy");
    std::vector<std::int32_t> table(occ.size(), LookupTable::kEmpty);
    std::int32_t next = 0;
    for (std::int64_t i = 0; i < occ.size(); ++i)
        if (occ.occupied(i))
            table[i] = next++;
    return LookupTable(occ.spec(), std::move(table));
}

SparseFeatureVolume::SparseFeatureVolume(LookupTable lookup, int channels, std::vector<float> minivolumes)
    : lookup_(std::move(lookup)), channels_(channels), local_count_(lookup_.spec().local_count()) {
    if (channels_ <= 0)
        throw DomainError("feature channel count must be positive");
    const auto expected = static_cast<std::uint64_t>(lookup_.occupied_count()) * channels_ * local_count_;
    if (minivolumes.size() != expected)
        throw DomainError("mini-volume payload size does not match N x C x s^3");
    for (const float v : minivolumes)
        if (!std::isfinite(v))
            throw DomainError("mini-volume features must be finite");
    payload_.resize(minivolumes.size());
    const std::size_t block = static_cast<std::size_t>(channels_) * local_count_;
    for (std::size_t n = 0; n < static_cast<std::size_t>(lookup_.occupied_count()); ++n)
        for (int c = 0; c < channels_; ++c)
            for (std::int64_t l = 0; l < local_count_; ++l)
                payload_[n * block + l * channels_ + c] = minivolumes[n * block + c * local_count_ + l];

    const GridSpec& g = lookup_.spec();
    origin_ = g.bbox().min_corner();
    inv_edge_ = g.fine_edge().cwiseInverse();
    fine_res_ = g.fine_resolution();
    s_ = g.supersample();
    zeros_.assign(channels_, 0.0f);
}

std::vector<float> SparseFeatureVolume::minivolumes() const {
    std::vector<float> out(payload_.size());
    const std::size_t block = static_cast<std::size_t>(channels_) * local_count_;
    for (std::size_t n = 0; n < static_cast<std::size_t>(minivolume_count()); ++n)
        for (int c = 0; c < channels_; ++c)
            for (std::int64_t l = 0; l < local_count_; ++l)
                out[n * block + c * local_count_ + l] = payload_[n * block + l * channels_ + c];
    return out;
}

bool SparseFeatureVolume::operator==(const SparseFeatureVolume& other) const {
    return spec() == other.spec() && channels_ == other.channels_ &&
           std::equal(lookup_.entries().begin(), lookup_.entries().end(), other.lookup_.entries().begin(),
                      other.lookup_.entries().end()) &&
           payload_ == other.payload_;
}

bool SparseFeatureVolume::query_into(const Vec3& point, std::span<float> out) const {
    std::fill(out.begin(), out.begin() + channels_, 0.0f);
    const GridSpec& g = spec();
    if (!g.bbox().contains(point))
        return false;

    // per axis and side (lower, upper vertex): coarse offset, local offset and weight
    const Index3 k = g.coarse_resolution();
    const std::int64_t coarse_stride[3] = {std::int64_t{k.y()} * k.z(), k.z(), 1};
    const std::int64_t local_stride[3] = {std::int64_t{s_} * s_, s_, 1};
    std::int64_t coarse[3][2], local[3][2];
    double weight[3][2];
    for (int a = 0; a < 3; ++a) {
        // continuous coordinate on the lattice of fine-voxel centers
        const int res = fine_res_[a];
        const double u = std::clamp((point[a] - origin_[a]) * inv_edge_[a] - 0.5, 0.0, static_cast<double>(res - 1));
        const int i0 = std::min(static_cast<int>(u), std::max(res - 2, 0));
        const int v[2] = {i0, std::min(i0 + 1, res - 1)};
        const double f = std::clamp(u - i0, 0.0, 1.0);
        weight[a][0] = 1.0 - f;
        weight[a][1] = f;
        for (int b = 0; b < 2; ++b) {
            const int o = v[b] / s_;
            coarse[a][b] = o * coarse_stride[a];
            local[a][b] = (v[b] - o * s_) * local_stride[a];
        }
    }

    constexpr int kStackChannels = 64;
    std::array<double, kStackChannels> stack{};
    std::vector<double> heap;
    double* acc = stack.data();
    if (channels_ > kStackChannels) {
        heap.assign(channels_, 0.0);
        acc = heap.data();
    }
    // Branch-free over the corners: an empty voxel reads the zero block, so consecutive
    // queries can overlap their memory accesses.
    bool inside = true;
    for (int corner = 0; corner < 8; ++corner) {
        const int bx = corner >> 2 & 1, by = corner >> 1 & 1, bz = corner & 1;
        const double w = weight[0][bx] * weight[1][by] * weight[2][bz];
        const std::int32_t n = lookup_[coarse[0][bx] + coarse[1][by] + coarse[2][bz]];
        const bool empty = n == LookupTable::kEmpty;
        inside &= !empty;
        const std::size_t offset =
            (static_cast<std::size_t>(n) * local_count_ + local[0][bx] + local[1][by] + local[2][bz]) * channels_;
        const float* base = empty ? zeros_.data() : payload_.data() + offset;
        for (int c = 0; c < channels_; ++c)
            acc[c] += w * base[c];
    }
    for (int c = 0; c < channels_; ++c)
        out[c] = static_cast<float>(acc[c]);
    return inside;
}

QueryResult SparseFeatureVolume::query(const Vec3& point) const {
    QueryResult r;
    r.feature.resize(channels_);
    r.inside = query_into(point, r.feature);
    return r;
}

SparseFeatureVolume build_sparse_volume(const OccupancyField& occ, std::span<const FeatureMap> maps,
                                        std::span<const Camera> cameras) {
    const int c_img = check_views(maps, cameras);
    const int channels = 2 * c_img;
    LookupTable lookup = build_lookup(occ);
    const GridSpec& spec = occ.spec();
    const std::int64_t locals = spec.local_count();
    const int s = spec.supersample();
    std::vector<float> payload(static_cast<std::size_t>(lookup.occupied_count()) * channels * locals, 0.0f);
    parallel_for(0, lookup.occupied_count(), [&](std::int64_t n) {
        const Index3 vo = lookup.coord_of(static_cast<std::int32_t>(n));
        std::vector<float> feat(channels);
        for (std::int64_t l = 0; l < locals; ++l) {
            const Index3 vg = vo * s + spec.local_coord(l);
            const Vec3 center = voxel_center(spec, {Frame::Global, vg});
            aggregate_at_into(center, maps, cameras, feat);
            for (int c = 0; c < channels; ++c)
                payload[(static_cast<std::size_t>(n) * channels + c) * locals + l] = feat[c];
        }
    });
    return SparseFeatureVolume(std::move(lookup), channels, std::move(payload));
}

DenseFineGrid densify(const SparseFeatureVolume& vol, std::uint64_t budget_bytes) {
    const GridSpec& spec = vol.spec();
    const Index3 res = spec.fine_resolution();
    const auto cells = static_cast<std::uint64_t>(spec.fine_count());
    const std::uint64_t bytes = cells * vol.channels() * sizeof(float);
    if (bytes > budget_bytes)
        throw BudgetExceeded("densified grid needs " + std::to_string(bytes) + " bytes, budget is " +
                             std::to_string(budget_bytes));
    DenseFineGrid grid{res, vol.channels(), std::vector<float>(cells * vol.channels(), 0.0f)};
    const int s = spec.supersample();
    for (std::int32_t n = 0; n < vol.minivolume_count(); ++n) {
        const Index3 vo = vol.lookup().coord_of(n);
        for (std::int64_t l = 0; l < spec.local_count(); ++l) {
            const Index3 vg = vo * s + spec.local_coord(l);
            float* dst = grid.data.data() + grid.index(vg) * vol.channels();
            for (int c = 0; c < vol.channels(); ++c)
                dst[c] = vol.feature(n, c, l);
        }
    }
    return grid;
}

SparseFeatureVolume sparsify(const DenseFineGrid& grid, const OccupancyField& occ) {
    const GridSpec& spec = occ.spec();
    if (grid.resolution != spec.fine_resolution())
        throw DomainError("dense grid resolution does not match the occupancy grid");
    LookupTable lookup = build_lookup(occ);
    const int channels = grid.channels;
    const std::int64_t locals = spec.local_count();
    const int s = spec.supersample();
    std::vector<float> payload(static_cast<std::size_t>(lookup.occupied_count()) * channels * locals);
    for (std::int32_t n = 0; n < lookup.occupied_count(); ++n) {
        const Index3 vo = lookup.coord_of(n);
        for (std::int64_t l = 0; l < locals; ++l) {
            const Index3 vg = vo * s + spec.local_coord(l);
            const float* src = grid.data.data() + grid.index(vg) * channels;
            for (int c = 0; c < channels; ++c)
                payload[(static_cast<std::size_t>(n) * channels + c) * locals + l] = src[c];
        }
    }
    return SparseFeatureVolume(std::move(lookup), channels, std::move(payload));
}

MemoryReport memory_estimate(const GridSpec& spec, int channels, std::int64_t occupied) {
    MemoryReport r;
    constexpr std::uint64_t kScalar = sizeof(float);
    r.payload_bytes = static_cast<std::uint64_t>(occupied) * channels * spec.local_count() * kScalar;
    r.lookup_bytes = static_cast<std::uint64_t>(spec.coarse_count()) * sizeof(std::int32_t);
    r.sparse_bytes = r.payload_bytes + r.lookup_bytes;
    r.dense_equivalent_bytes = static_cast<std::uint64_t>(spec.fine_count()) * channels * kScalar;
    r.ratio = static_cast<double>(r.dense_equivalent_bytes) / static_cast<double>(r.sparse_bytes);
    r.payload_ratio = r.payload_bytes > 0
                          ? static_cast<double>(r.dense_equivalent_bytes) / static_cast<double>(r.payload_bytes)
                          : std::numeric_limits<double>::infinity();
    return r;
}

MemoryReport memory_report(const SparseFeatureVolume& vol) {
    return memory_estimate(vol.spec(), vol.channels(), vol.minivolume_count());
}

void write_bundle(const std::filesystem::path& dir, const SparseFeatureVolume& vol) {
    std::filesystem::create_directories(dir);
    const GridSpec& spec = vol.spec();
    Json meta = grid_spec_to_json(spec);
    meta["channels"] = vol.channels();
    meta["minivolumes"] = vol.minivolume_count();
    meta["layout"] = {{"lookup", "lookup.svt"}, {"minivolumes", "minivolumes.svt"}};
    write_json(dir / "spec.json", meta);

    const Index3 k = spec.coarse_resolution();
    write_tensor(dir / "lookup.svt",
                 Tensor::from<std::int32_t>({static_cast<std::uint64_t>(k.x()), static_cast<std::uint64_t>(k.y()),
                                             static_cast<std::uint64_t>(k.z())},
                                            vol.lookup().entries()));
    write_tensor(dir / "minivolumes.svt",
                 Tensor::from<float>({static_cast<std::uint64_t>(vol.minivolume_count()),
                                      static_cast<std::uint64_t>(vol.channels()),
                                      static_cast<std::uint64_t>(spec.local_count())},
                                     vol.minivolumes()));
}

SparseFeatureVolume read_bundle(const std::filesystem::path& dir) {
    const Json meta = read_json(dir / "spec.json");
    const GridSpec spec = grid_spec_from_json(meta);
    const int channels = meta.at("channels").get<int>();
    const Tensor lookup_t = read_tensor(dir / "lookup.svt");
    const Tensor payload_t = read_tensor(dir / "minivolumes.svt");
    const Index3 k = spec.coarse_resolution();
    if (lookup_t.shape() != Shape{static_cast<std::uint64_t>(k.x()), static_cast<std::uint64_t>(k.y()),
                                  static_cast<std::uint64_t>(k.z())})
        throw FormatError("lookup.svt shape does not match spec.json");
    LookupTable lookup(spec, lookup_t.values<std::int32_t>());
    if (payload_t.shape() != Shape{static_cast<std::uint64_t>(lookup.occupied_count()),
                                   static_cast<std::uint64_t>(channels),
                                   static_cast<std::uint64_t>(spec.local_count())})
        throw FormatError("minivolumes.svt shape does not match the lookup table and spec.json");
    return SparseFeatureVolume(std::move(lookup), channels, payload_t.values<float>());
}

} // namespace svol
