// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/ray_sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "svol/errors.hpp"

namespace svol {

namespace {

template <class Occupied>
std::vector<Fragment> traverse_impl(const Ray& ray, const GridSpec& spec, Occupied&& occupied) {
    std::vector<Fragment> out;
    const auto clip = ray_aabb(ray, spec.bbox());
    if (!clip || !(clip->t_exit > clip->t_enter))
        return out;

    const Vec3& o = ray.origin();
    const Vec3& d = ray.direction();
    const Vec3 lo = spec.bbox().min_corner();
    const Vec3 edge = spec.coarse_edge();
    const Index3 res = spec.coarse_resolution();
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // entry points sit on a face, so round-off can land one voxel out; clamp back in
    const Vec3 p0 = ray.at(clip->t_enter);
    Index3 v;
    std::array<int, 3> step{};
    std::array<double, 3> t_max{}, t_delta{};
    for (int a = 0; a < 3; ++a) {
        v[a] = std::clamp(static_cast<int>(std::floor((p0[a] - lo[a]) / edge[a])), 0, res[a] - 1);
        if (d[a] > 0.0) {
            step[a] = 1;
            t_max[a] = (lo[a] + (v[a] + 1) * edge[a] - o[a]) / d[a];
            t_delta[a] = edge[a] / d[a];
        } else if (d[a] < 0.0) {
            step[a] = -1;
            t_max[a] = (lo[a] + v[a] * edge[a] - o[a]) / d[a];
            t_delta[a] = -edge[a] / d[a];
        } else {
            step[a] = 0;
            t_max[a] = kInf;
            t_delta[a] = kInf;
        }
    }

    double t = clip->t_enter;
    const double t_end = clip->t_exit;
    while (t < t_end) {
        int axis = 0;
        if (t_max[1] < t_max[axis])
            axis = 1;
        if (t_max[2] < t_max[axis])
            axis = 2;
        const double t_next = std::min(t_max[axis], t_end);
        if (t_next > t && occupied(spec.coarse_index(v))) {
            if (!out.empty() && out.back().t_exit == t) {
                out.back().t_exit = t_next;
                out.back().last = v;
                ++out.back().voxels;
            } else {
                out.push_back({t, t_next, v, v, 1});
            }
        }
        t = std::max(t, t_next);
        if (t >= t_end)
            break;
        v[axis] += step[axis];
        if (v[axis] < 0 || v[axis] >= res[axis])
            break;
        t_max[axis] += t_delta[axis];
    }
    return out;
}

} // namespace

std::vector<Fragment> traverse(const Ray& ray, const OccupancyField& occ) {
    if (occ.kind() != OccupancyKind::Binary)
        throw DomainError("traversal needs a binary occupancy field");
    return traverse_impl(ray, occ.spec(), [&](std::int64_t i) { return occ.occupied(i); });
}

std::vector<Fragment> traverse(const Ray& ray, const LookupTable& lookup) {
    return traverse_impl(ray, lookup.spec(), [&](std::int64_t i) { return lookup[i] != LookupTable::kEmpty; });
}

std::vector<int> allocate_samples(const std::vector<Fragment>& fragments, int n_samples) {
    std::vector<int> counts(fragments.size(), 0);
    double total = 0.0;
    for (const auto& f : fragments)
        total += std::max(0.0, f.length());
    if (fragments.empty() || n_samples <= 0 || !(total > 0.0))
        return counts;

    std::vector<double> remainder(fragments.size());
    int assigned = 0;
    for (std::size_t k = 0; k < fragments.size(); ++k) {
        const double quota = n_samples * std::max(0.0, fragments[k].length()) / total;
        counts[k] = static_cast<int>(std::floor(quota));
        remainder[k] = quota - counts[k];
        assigned += counts[k];
    }
    std::vector<std::size_t> order(fragments.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < n_samples; i = (i + 1) % order.size()) {
        ++counts[order[i]];
        ++assigned;
    }
    return counts;
}

std::uint64_t ray_seed(std::uint64_t base, std::uint64_t ray_index) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (ray_index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

RaySampleBatch sample(const Ray& ray, std::vector<Fragment> fragments, int n_samples, const SamplingMode& mode) {
    if (n_samples < 1)
        throw DomainError("n_samples must be at least 1");
    RaySampleBatch batch{ray, {}, std::move(fragments)};
    const std::vector<int> counts = allocate_samples(batch.fragments, n_samples);
    std::mt19937_64 rng(mode.seed);
    batch.ts.reserve(n_samples);
    for (std::size_t k = 0; k < batch.fragments.size(); ++k) {
        const Fragment& f = batch.fragments[k];
        const double width = f.length() / std::max(counts[k], 1);
        for (int j = 0; j < counts[k]; ++j) {
            double u = 0.5;
            if (mode.kind == SamplingMode::Kind::Stratified)
                u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            const double t = f.t_enter + (j + u) * width;
            if (batch.ts.empty() || t > batch.ts.back())
                batch.ts.push_back(t);
        }
    }
    return batch;
}

} // namespace svol
