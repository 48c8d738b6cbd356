// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "svol/errors.hpp"
#include "svol/ray_sampling.hpp"

using namespace svol;

namespace {

const BoundingBox kUnit(Vec3::Constant(-0.5), Vec3::Constant(0.5));

OccupancyField full(const GridSpec& spec) {
    return OccupancyField::binary(spec, std::vector<std::uint8_t>(spec.coarse_count(), 1));
}

Fragment fragment(double a, double b) {
    Fragment f;
    f.t_enter = a;
    f.t_exit = b;
    return f;
}

Ray random_ray(oracle::Rng& rng, const BoundingBox& box) {
    const Vec3 origin = box.center() + 1.5 * box.diagonal() * rng.direction();
    const Vec3 target = box.center() + 0.5 * box.extent().cwiseProduct(rng.vec(-1, 1));
    return Ray(origin, target - origin);
}

std::vector<oracle::Span> as_spans(const std::vector<Fragment>& frags) {
    std::vector<oracle::Span> out;
    for (const auto& f : frags)
        out.push_back({f.t_enter, f.t_exit});
    return out;
}

} // namespace

TEST_SUITE("ray_sampling") {

TEST_CASE("traverse: axis ray through a full grid is one fragment of the box edge") {
    const GridSpec spec(kUnit, 4, 1);
    const auto frags = traverse(Ray(Vec3(-2, 0.1, 0.2), Vec3(1, 0, 0)), full(spec));
    REQUIRE(frags.size() == 1);
    CHECK(frags[0].t_enter == doctest::Approx(1.5));
    CHECK(frags[0].length() == doctest::Approx(1.0));
    CHECK(frags[0].voxels == 4);
    CHECK(frags[0].first == Index3(0, 2, 2));
    CHECK(frags[0].last == Index3(3, 2, 2));

    CHECK(traverse(Ray(Vec3(-2, 2, 0), Vec3(1, 0, 0)), full(spec)).empty());
    CHECK(traverse(Ray(Vec3(2, 0, 0), Vec3(1, 0, 0)), full(spec)).empty());
    CHECK(traverse(Ray(Vec3(0, 0, 0), Vec3(0, 0, 1)), OccupancyField::empty(spec)).empty());
}

TEST_CASE("traverse: gaps split fragments, origin inside the box") {
    const GridSpec spec(kUnit, 4, 1);
    std::vector<std::uint8_t> v(64, 0);
    for (int x : {0, 1, 3})
        v[spec.coarse_index(Index3(x, 1, 1))] = 1;
    const OccupancyField occ = OccupancyField::binary(spec, v);
    const auto frags = traverse(Ray(Vec3(-1, -0.1, -0.1), Vec3(1, 0, 0)), occ);
    REQUIRE(frags.size() == 2);
    CHECK(frags[0].t_enter == doctest::Approx(0.5));
    CHECK(frags[0].t_exit == doctest::Approx(1.0));
    CHECK(frags[1].t_enter == doctest::Approx(1.25));
    CHECK(frags[1].t_exit == doctest::Approx(1.5));

    const auto inside = traverse(Ray(Vec3(-0.3, -0.1, -0.1), Vec3(1, 0, 0)), occ);
    REQUIRE(inside.size() == 2);
    CHECK(inside[0].t_enter == doctest::Approx(0.0));
    CHECK(inside[0].t_exit == doctest::Approx(0.3));

    // the lookup-table overload agrees
    const auto via_lut = traverse(Ray(Vec3(-1, -0.1, -0.1), Vec3(1, 0, 0)), build_lookup(occ));
    REQUIRE(via_lut.size() == 2);
    CHECK(via_lut[1].t_enter == frags[1].t_enter);
}

TEST_CASE("traverse: agrees with the per-voxel slab oracle on random rays") {
    oracle::Rng rng(61);
    int rays = 0, mismatches = 0;
    for (int scene = 0; scene < 10; ++scene) {
        const GridSpec spec(BoundingBox(Vec3(-0.5, -0.3, -0.4), Vec3(0.5, 0.4, 0.6)),
                            Index3(rng.integer(3, 10), rng.integer(3, 10), rng.integer(3, 10)), 1);
        const OccupancyField occ = oracle::bernoulli_occupancy(spec, rng.uniform(0.1, 0.6), rng);
        for (int i = 0; i < 100; ++i, ++rays) {
            const Ray ray = random_ray(rng, spec.bbox());
            const auto frags = traverse(ray, occ);
            for (std::size_t k = 0; k + 1 < frags.size(); ++k)
                CHECK(frags[k].t_exit <= frags[k + 1].t_enter);
            const auto got = oracle::normalize_spans(as_spans(frags), 1e-9);
            const auto ref = oracle::normalize_spans(oracle::slab_occupied(ray, occ), 1e-9);
            if (!oracle::spans_match(got, ref, 1e-9))
                ++mismatches;
            const auto raw = as_spans(frags);
            const double step = 1e-4 * spec.bbox().diagonal();
            CHECK(oracle::march_disagreements(ray, occ, step, raw, 1e-3) == 0);
            // negative control: dropping a fragment longer than the tolerance must be noticed
            for (std::size_t k = 0; k < raw.size(); ++k)
                if (raw[k].t_exit - raw[k].t_enter > 1e-2) {
                    auto dropped = raw;
                    dropped.erase(dropped.begin() + static_cast<std::ptrdiff_t>(k));
                    CHECK(oracle::march_disagreements(ray, occ, step, dropped, 1e-3) > 0);
                    break;
                }
        }
    }
    CHECK(rays == 1000);
    CHECK(mismatches == 0);
}

TEST_CASE("sample: stratum centers, empty input, proportional allocation") {
    const Ray ray(Vec3::Zero(), Vec3(0, 0, 1));
    const RaySampleBatch b = sample(ray, {fragment(1, 2)}, 4, SamplingMode::uniform());
    REQUIRE(b.size() == 4);
    const double expect[] = {1.125, 1.375, 1.625, 1.875};
    for (int i = 0; i < 4; ++i)
        CHECK(b.ts[i] == doctest::Approx(expect[i]).epsilon(1e-15));
    CHECK(b.point(2) == Vec3(0, 0, b.ts[2]));

    CHECK(sample(ray, {}, 64, SamplingMode::stratified(3)).size() == 0);

    CHECK(allocate_samples({fragment(0, 1), fragment(2, 5)}, 64) == std::vector<int>{16, 48});
    CHECK(allocate_samples({fragment(0, 1), fragment(1, 2), fragment(2, 3)}, 4) == std::vector<int>{2, 1, 1});
    CHECK(allocate_samples({fragment(0, 1), fragment(3, 3)}, 5) == std::vector<int>{5, 0});
    CHECK_THROWS_AS(sample(ray, {fragment(0, 1)}, 0, SamplingMode::uniform()), DomainError);
}

TEST_CASE("sample: confinement, ordering, counts, determinism") {
    oracle::Rng rng(62);
    const GridSpec spec(kUnit, 8, 1);
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.3, rng);
    const LookupTable lut = build_lookup(occ);
    int nonempty = 0;
    for (int i = 0; i < 500; ++i) {
        const Ray ray = random_ray(rng, spec.bbox());
        const auto frags = traverse(ray, lut);
        const int n = rng.integer(1, 96);
        const SamplingMode mode = i % 2 ? SamplingMode::uniform() : SamplingMode::stratified(ray_seed(7, i));
        const RaySampleBatch b = sample(ray, frags, n, mode);
        CHECK(b.size() <= static_cast<std::size_t>(n));
        if (frags.empty()) {
            CHECK(b.size() == 0);
            continue;
        }
        ++nonempty;
        CHECK(b.size() == static_cast<std::size_t>(n));
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (j > 0)
                CHECK(b.ts[j] > b.ts[j - 1]);
            const auto v = locate(spec, b.point(j), Frame::Occupancy);
            REQUIRE(v);
            CHECK(lut.at(*v) >= 0);
        }
        const RaySampleBatch again = sample(ray, frags, n, mode);
        CHECK(again.ts == b.ts);
        const auto counts = allocate_samples(frags, n);
        CHECK(std::accumulate(counts.begin(), counts.end(), 0) == n);
    }
    CHECK(nonempty > 100);
    CHECK(ray_seed(7, 1) != ray_seed(7, 2));
    CHECK(ray_seed(7, 1) != ray_seed(8, 1));
}

} // TEST_SUITE
