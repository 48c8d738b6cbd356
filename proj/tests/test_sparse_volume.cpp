// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "svol/errors.hpp"
#include "svol/sparse_volume.hpp"
#include "temp_dir.hpp"

using namespace svol;

namespace {

const BoundingBox kUnit(Vec3::Constant(-0.5), Vec3::Constant(0.5));

OccupancyField occupancy_at(const GridSpec& spec, const std::vector<Index3>& coords) {
    std::vector<std::uint8_t> v(spec.coarse_count(), 0);
    for (const auto& c : coords)
        v[spec.coarse_index(c)] = 1;
    return OccupancyField::binary(spec, std::move(v));
}

FeatureMap random_map(oracle::Rng& rng, int c, int h, int w) {
    std::vector<float> data(static_cast<std::size_t>(c) * h * w);
    for (float& v : data)
        v = static_cast<float>(rng.uniform(-1, 1));
    return FeatureMap(c, h, w, std::move(data));
}

double max_abs(const std::vector<float>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_SUITE("sparse_volume") {

TEST_CASE("build_lookup: empty, single voxel, scan order") {
    const GridSpec spec(kUnit, 4, 2);
    const LookupTable empty = build_lookup(OccupancyField::empty(spec));
    CHECK(empty.occupied_count() == 0);
    CHECK(std::all_of(empty.entries().begin(), empty.entries().end(), [](auto v) { return v == LookupTable::kEmpty; }));

    const LookupTable one = build_lookup(occupancy_at(spec, {Index3(2, 1, 3)}));
    CHECK(one.occupied_count() == 1);
    CHECK(one.at(Index3(2, 1, 3)) == 0);
    CHECK(one.coord_of(0) == Index3(2, 1, 3));

    oracle::Rng rng(51);
    const GridSpec big(kUnit, Index3(5, 7, 6), 1);
    const OccupancyField occ = oracle::bernoulli_occupancy(big, 0.3, rng);
    const LookupTable lut = build_lookup(occ);
    std::int32_t next = 0;
    for (std::int64_t i = 0; i < big.coarse_count(); ++i) {
        if (occ.occupied(i)) {
            CHECK(lut[i] == next);
            CHECK(big.coarse_index(lut.coord_of(next)) == i);
            ++next;
        } else {
            CHECK(lut[i] == LookupTable::kEmpty);
        }
    }
    CHECK(lut.occupied_count() == next);
    CHECK(lut.occupancy().values().size() == occ.values().size());
    CHECK(std::equal(occ.values().begin(), occ.values().end(), lut.occupancy().values().begin()));
}

TEST_CASE("build_sparse_volume: s=1 equals the dense coarse volume") {
    oracle::Rng rng(52);
    const GridSpec spec(kUnit, 6, 1);
    std::vector<Camera> cams;
    std::vector<FeatureMap> maps;
    for (int v = 0; v < 3; ++v) {
        cams.push_back(oracle::random_camera(rng, Vec3::Zero(), 32, 24));
        maps.push_back(random_map(rng, 3, 24, 32));
    }
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.4, rng);
    const SparseFeatureVolume vol = build_sparse_volume(occ, maps, cams);
    const DenseFeatureVolume dense = build_dense_volume(spec, maps, cams);
    REQUIRE(vol.channels() == 6);
    for (std::int64_t i = 0; i < spec.coarse_count(); ++i) {
        const std::int32_t n = vol.lookup()[i];
        if (n < 0)
            continue;
        const auto ref = dense.at(i);
        for (int c = 0; c < 6; ++c)
            CHECK(vol.feature(n, c, 0) == ref[c]);
    }
}

TEST_CASE("build_sparse_volume: K=4, s=2 matches the brute-force fine volume") {
    oracle::Rng rng(53);
    const GridSpec spec(kUnit, 4, 2);
    const GridSpec fine(kUnit, 8, 1);
    std::vector<Camera> cams;
    std::vector<FeatureMap> maps;
    for (int v = 0; v < 4; ++v) {
        cams.push_back(oracle::random_camera(rng, Vec3::Zero(), 32, 24));
        maps.push_back(random_map(rng, 2, 24, 32));
    }
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.5, rng);
    const SparseFeatureVolume vol = build_sparse_volume(occ, maps, cams);
    const DenseFeatureVolume brute = build_dense_volume(fine, maps, cams);
    int compared = 0;
    for (std::int64_t g = 0; g < fine.coarse_count(); ++g) {
        const Index3 gv = fine.coarse_coord(g);
        const Index3 vo = gv / 2;
        const Index3 vl = gv - vo * 2;
        const std::int32_t n = vol.lookup().at(vo);
        if (n < 0)
            continue;
        const auto ref = brute.at(g);
        for (int c = 0; c < 4; ++c)
            CHECK(vol.feature(n, c, spec.local_index(vl)) == ref[c]);
        ++compared;
    }
    CHECK(compared == 8 * occ.occupied_count());
}

TEST_CASE("storage: 3 occupied of 64 with s=2, C=4 keeps 96 scalars against 2048 dense") {
    const GridSpec spec(kUnit, 4, 2);
    const OccupancyField occ = occupancy_at(spec, {Index3(0, 0, 0), Index3(1, 2, 3), Index3(3, 3, 3)});
    oracle::Rng rng(54);
    const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 4, rng);
    CHECK(vol.scalar_count() == 96);
    CHECK(vol.minivolumes().size() == 96);
    const MemoryReport r = memory_report(vol);
    CHECK(r.payload_bytes == 96 * 4);
    CHECK(r.lookup_bytes == 64 * 4);
    CHECK(r.sparse_bytes == 96 * 4 + 64 * 4);
    CHECK(r.dense_equivalent_bytes == 2048 * 4);
    CHECK(r.ratio == doctest::Approx(2048.0 / (96 + 64)));
    CHECK(r.payload_ratio == doctest::Approx(2048.0 / 96));
}

TEST_CASE("query: fine-voxel centers, empty regions, outside the box") {
    oracle::Rng rng(55);
    const GridSpec spec(kUnit, 4, 2);
    const OccupancyField occ = occupancy_at(spec, {Index3(1, 1, 1), Index3(1, 1, 2), Index3(3, 0, 0)});
    const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 3, rng);
    const Index3 g(3, 2, 4);
    const Vec3 center = voxel_center(spec, {Frame::Global, g});
    const QueryResult at = vol.query(center);
    const std::int32_t n = vol.lookup().at(g / 2);
    for (int c = 0; c < 3; ++c)
        CHECK(at.feature[c] == vol.feature(n, c, spec.local_index(g - (g / 2) * 2)));

    const QueryResult far = vol.query(Vec3(-0.45, 0.45, 0.45));
    CHECK_FALSE(far.inside);
    CHECK(far.feature == std::vector<float>(3, 0.0f));

    const QueryResult out = vol.query(Vec3(0.6, 0, 0));
    CHECK_FALSE(out.inside);
    CHECK(out.feature == std::vector<float>(3, 0.0f));

    std::vector<float> buf(3);
    CHECK(vol.query_into(center, buf) == at.inside);
    CHECK(buf == at.feature);
}

TEST_CASE("query: matches the densified trilinear oracle on random volumes") {
    oracle::Rng rng(56);
    for (double p : {0.05, 0.3, 1.0}) {
        const GridSpec spec(BoundingBox(Vec3(-1, -0.5, 0), Vec3(1, 0.7, 1.3)), 8, 4);
        const OccupancyField occ = oracle::bernoulli_occupancy(spec, p, rng);
        const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 8, rng);
        const DenseFineGrid grid = oracle::dense_from_payload(vol);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const Vec3 pt = spec.bbox().min_corner() + rng.vec(0, 1).cwiseProduct(spec.bbox().extent());
            worst = std::max(worst, max_abs(vol.query(pt).feature, oracle::dense_trilinear(spec, grid, pt)));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("query: continuous across voxel boundaries") {
    oracle::Rng rng(57);
    const GridSpec spec(kUnit, 8, 2);
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.5, rng);
    const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 4, rng);
    const std::vector<float> payload = vol.minivolumes();
    const auto [lo, hi] = std::minmax_element(payload.begin(), payload.end());
    const double range = *hi - *lo;
    const double edge = spec.fine_edge().x();
    for (int i = 0; i < 2000; ++i) {
        Vec3 p = rng.vec(-0.45, 0.45);
        const int axis = rng.integer(0, 2);
        // snap one coordinate onto a fine or coarse boundary
        p[axis] = -0.5 + edge * std::round((p[axis] + 0.5) / edge);
        Vec3 a = p, b = p;
        a[axis] -= 1e-6;
        b[axis] += 1e-6;
        const auto fa = vol.query(a).feature;
        const auto fb = vol.query(b).feature;
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(fa[c] - fb[c]) <= 1e-4 * range);
    }
}

TEST_CASE("densify: empty, single voxel, round trip, budget") {
    oracle::Rng rng(58);
    const GridSpec small(kUnit, 2, 2);
    const SparseFeatureVolume none = oracle::random_sparse_volume(OccupancyField::empty(small), 2, rng);
    const DenseFineGrid zero = densify(none);
    CHECK(zero.data.size() == 64 * 2);
    CHECK(std::all_of(zero.data.begin(), zero.data.end(), [](float v) { return v == 0.0f; }));

    const SparseFeatureVolume single = oracle::random_sparse_volume(occupancy_at(small, {Index3(1, 0, 1)}), 1, rng);
    const DenseFineGrid g = densify(single);
    int nonzero = 0;
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
            for (int z = 0; z < 4; ++z) {
                const float v = g.data[g.index(Index3(x, y, z))];
                if (v != 0.0f) {
                    ++nonzero;
                    const GridCoord o = convert_frames(small, {Frame::Global, Index3(x, y, z)}, Frame::Occupancy);
                    const GridCoord l = convert_frames(small, {Frame::Global, Index3(x, y, z)}, Frame::Local);
                    CHECK(o.index == Index3(1, 0, 1));
                    CHECK(v == single.feature(0, 0, small.local_index(l.index)));
                }
            }
    CHECK(nonzero == 8);

    const GridSpec spec(kUnit, Index3(5, 3, 4), 3);
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.35, rng);
    const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 5, rng);
    CHECK(sparsify(densify(vol), occ) == vol);

    CHECK_THROWS_AS(densify(vol, 1024), BudgetExceeded);
}

TEST_CASE("memory: occupancy fractions against byte arithmetic") {
    const GridSpec paper_scale(BoundingBox(Vec3::Zero(), Vec3::Ones()), 128, 4);
    const std::int64_t k3 = 128ll * 128 * 128;
    const auto at_fraction = [&](double f) {
        return memory_estimate(paper_scale, 32, static_cast<std::int64_t>(std::llround(f * k3)));
    };
    CHECK(at_fraction(0.0189).payload_ratio == doctest::Approx(52.9).epsilon(0.002));
    CHECK(at_fraction(0.0189).payload_ratio >= 50.0);
    CHECK(at_fraction(1.0).payload_ratio == doctest::Approx(1.0));
    CHECK(at_fraction(0.0045).payload_ratio == doctest::Approx(222.2).epsilon(0.002));

    const MemoryReport empty = memory_estimate(paper_scale, 32, 0);
    CHECK(empty.payload_bytes == 0);
    CHECK(empty.sparse_bytes == static_cast<std::uint64_t>(k3) * 4);
    CHECK(empty.ratio == doctest::Approx(64.0 * 32));
    CHECK(std::isinf(empty.payload_ratio));

    oracle::Rng rng(59);
    const GridSpec spec(kUnit, Index3(6, 4, 5), 3);
    const OccupancyField occ = oracle::bernoulli_occupancy(spec, 0.2, rng);
    const SparseFeatureVolume vol = oracle::random_sparse_volume(occ, 7, rng);
    const MemoryReport r = memory_report(vol);
    const std::uint64_t n = static_cast<std::uint64_t>(occ.occupied_count());
    CHECK(r.payload_bytes == n * 7 * 27 * 4);
    CHECK(r.lookup_bytes == 120 * 4);
    CHECK(r.dense_equivalent_bytes == 120ull * 27 * 7 * 4);
    CHECK(r.ratio == doctest::Approx(static_cast<double>(r.dense_equivalent_bytes) / r.sparse_bytes));
}

TEST_CASE("bundle: write and read back, corrupt inputs rejected") {
    TempDir dir;
    oracle::Rng rng(60);
    const GridSpec spec(BoundingBox(Vec3(-1, 0, 2), Vec3(1, 1.5, 3)), Index3(4, 5, 3), 2);
    const SparseFeatureVolume vol = oracle::random_sparse_volume(oracle::bernoulli_occupancy(spec, 0.3, rng), 6, rng);
    write_bundle(dir / "b", vol);
    const SparseFeatureVolume back = read_bundle(dir / "b");
    CHECK(back == vol);
    CHECK(back.spec() == spec);

    write_tensor(dir / "b" / "minivolumes.svt", Tensor::from<float>({1, 6, 8}, std::vector<float>(48, 0.0f)));
    CHECK_THROWS(read_bundle(dir / "b"));
    CHECK_THROWS(read_bundle(dir / "missing"));
}

} // TEST_SUITE
