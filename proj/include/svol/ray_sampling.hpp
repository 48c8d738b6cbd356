// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "svol/geometry.hpp"
#include "svol/occupancy.hpp"
#include "svol/sparse_volume.hpp"

namespace svol {

/// Interval of a ray inside a run of consecutive occupied coarse voxels.
struct Fragment {
    double t_enter = 0.0;
    double t_exit = 0.0;
    Index3 first;   // coarse voxel where the run starts
    Index3 last;    // coarse voxel where it ends
    int voxels = 0; // occupied voxels visited with nonzero length

    double length() const { return t_exit - t_enter; }
};

/// Voxel-stepping traversal of the coarse grid. Emits occupied runs front to back; a run continues
/// across voxels whose shared boundary is crossed with no gap. Zero-length visits (grazing an edge
/// or corner) are skipped. t is absolute along the ray; the ray is clipped to the box first.
std::vector<Fragment> traverse(const Ray& ray, const OccupancyField& occ);
std::vector<Fragment> traverse(const Ray& ray, const LookupTable& lookup);

struct SamplingMode {
    enum class Kind { Uniform, Stratified };
    Kind kind = Kind::Stratified;
    std::uint64_t seed = 0;

    static SamplingMode uniform() { return {Kind::Uniform, 0}; }
    static SamplingMode stratified(std::uint64_t seed) { return {Kind::Stratified, seed}; }
};

struct RaySampleBatch {
    Ray ray;
    std::vector<double> ts;
    std::vector<Fragment> fragments;

    std::size_t size() const { return ts.size(); }
    Vec3 point(std::size_t i) const { return ray.at(ts[i]); }
};

/// Distributes n samples over the fragments in proportion to their length (largest remainder,
/// ties to the earlier fragment), then splits each fragment into equal strata. Uniform places a
/// sample at each stratum center; Stratified jitters it inside the stratum.
RaySampleBatch sample(const Ray& ray, std::vector<Fragment> fragments, int n_samples, const SamplingMode& mode);

/// Per-fragment sample counts used by sample().
std::vector<int> allocate_samples(const std::vector<Fragment>& fragments, int n_samples);

/// Decorrelated per-ray seed derived from a base seed and a ray index.
std::uint64_t ray_seed(std::uint64_t base, std::uint64_t ray_index);

} // namespace svol
