// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

namespace oracle {

using namespace svol;

Vec3 Rng::direction() {
    std::normal_distribution<double> n;
    Vec3 d;
    do {
        d = Vec3(n(engine_), n(engine_), n(engine_));
    } while (d.norm() < 1e-6);
    return d.normalized();
}

OccupancyField bernoulli_occupancy(const GridSpec& spec, double p, Rng& rng) {
    std::vector<std::uint8_t> v(spec.coarse_count());
    for (auto& x : v)
        x = rng.uniform() < p ? 1 : 0;
    return OccupancyField::binary(spec, std::move(v));
}

SparseFeatureVolume random_sparse_volume(const OccupancyField& occ, int channels, Rng& rng) {
    LookupTable lookup = build_lookup(occ);
    std::vector<float> payload(static_cast<std::size_t>(lookup.occupied_count()) * channels *
                               occ.spec().local_count());
    for (float& f : payload)
        f = static_cast<float>(rng.uniform(-1.0, 1.0));
    return SparseFeatureVolume(std::move(lookup), channels, std::move(payload));
}

DenseFineGrid dense_from_payload(const SparseFeatureVolume& vol) {
    const GridSpec& spec = vol.spec();
    const int s = spec.supersample();
    DenseFineGrid g;
    g.resolution = spec.fine_resolution();
    g.channels = vol.channels();
    g.data.assign(static_cast<std::size_t>(spec.fine_count()) * g.channels, 0.0f);
    for (int x = 0; x < spec.coarse_resolution().x(); ++x)
        for (int y = 0; y < spec.coarse_resolution().y(); ++y)
            for (int z = 0; z < spec.coarse_resolution().z(); ++z) {
                const std::int32_t n = vol.lookup().at(Index3(x, y, z));
                if (n < 0)
                    continue;
                for (int lx = 0; lx < s; ++lx)
                    for (int ly = 0; ly < s; ++ly)
                        for (int lz = 0; lz < s; ++lz) {
                            const Index3 gcoord(x * s + lx, y * s + ly, z * s + lz);
                            const int local = (lx * s + ly) * s + lz;
                            for (int c = 0; c < g.channels; ++c)
                                g.data[g.index(gcoord) * g.channels + c] = vol.feature(n, c, local);
                        }
            }
    return g;
}

std::vector<double> dense_trilinear(const GridSpec& spec, const DenseFineGrid& grid, const Vec3& p) {
    std::vector<double> out(grid.channels, 0.0);
    if (!spec.bbox().contains(p))
        return out;
    const Vec3 fe = spec.fine_edge();
    int i0[3], i1[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
        const int r = grid.resolution[a];
        double u = (p[a] - spec.bbox().min_corner()[a]) / fe[a] - 0.5;
        u = std::min(std::max(u, 0.0), static_cast<double>(r - 1));
        if (r == 1) {
            i0[a] = i1[a] = 0;
            f[a] = 0.0;
            continue;
        }
        i0[a] = std::min(static_cast<int>(std::floor(u)), r - 2);
        i1[a] = i0[a] + 1;
        f[a] = u - i0[a];
    }
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz) {
                const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
                const Index3 g(dx ? i1[0] : i0[0], dy ? i1[1] : i0[1], dz ? i1[2] : i0[2]);
                for (int c = 0; c < grid.channels; ++c)
                    out[c] += w * grid.data[grid.index(g) * grid.channels + c];
            }
    return out;
}

std::vector<Span> slab_occupied(const Ray& ray, const OccupancyField& occ) {
    const BoundingBox& box = occ.spec().bbox();
    const Index3 k = occ.spec().coarse_resolution();
    const Vec3 edge = box.extent().cwiseQuotient(k.cast<double>());
    std::vector<Span> hits;
    for (int x = 0; x < k.x(); ++x)
        for (int y = 0; y < k.y(); ++y)
            for (int z = 0; z < k.z(); ++z) {
                if (!occ.occupied(Index3(x, y, z)))
                    continue;
                const Vec3 lo = box.min_corner() + Vec3(x, y, z).cwiseProduct(edge);
                const Vec3 hi = lo + edge;
                double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
                for (int a = 0; a < 3; ++a) {
                    const double o = ray.origin()[a], d = ray.direction()[a];
                    if (d == 0.0) {
                        if (o < lo[a] || o >= hi[a])
                            t1 = -1.0;
                        continue;
                    }
                    const double ta = (lo[a] - o) / d, tb = (hi[a] - o) / d;
                    t0 = std::max(t0, std::min(ta, tb));
                    t1 = std::min(t1, std::max(ta, tb));
                }
                if (t1 > t0)
                    hits.push_back({t0, t1});
            }
    std::sort(hits.begin(), hits.end(), [](const Span& a, const Span& b) { return a.t_enter < b.t_enter; });
    std::vector<Span> merged;
    for (const Span& s : hits) {
        if (!merged.empty() && s.t_enter <= merged.back().t_exit + 1e-12)
            merged.back().t_exit = std::max(merged.back().t_exit, s.t_exit);
        else
            merged.push_back(s);
    }
    return merged;
}

std::int64_t march_disagreements(const Ray& ray, const OccupancyField& occ, double step,
                                 const std::vector<Span>& spans, double eps) {
    const BoundingBox& box = occ.spec().bbox();
    const Index3 k = occ.spec().coarse_resolution();
    const Vec3 edge = box.extent().cwiseQuotient(k.cast<double>());
    // clip to the box by the slab test
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin()[a], d = ray.direction()[a];
        if (d == 0.0) {
            if (o < box.min_corner()[a] || o > box.max_corner()[a])
                return spans.empty() ? 0 : 1;
            continue;
        }
        const double ta = (box.min_corner()[a] - o) / d, tb = (box.max_corner()[a] - o) / d;
        t0 = std::max(t0, std::min(ta, tb));
        t1 = std::min(t1, std::max(ta, tb));
    }
    std::int64_t bad = 0;
    for (double t = t0 + 0.5 * step; t < t1; t += step) {
        const Vec3 p = ray.at(t);
        Index3 v;
        for (int a = 0; a < 3; ++a)
            v[a] = std::clamp(static_cast<int>(std::floor((p[a] - box.min_corner()[a]) / edge[a])), 0, k[a] - 1);
        const bool want = occ.occupied(v);
        bool have = false, near_end = false;
        for (const Span& s : spans) {
            have = have || (t >= s.t_enter && t < s.t_exit);
            near_end = near_end || std::abs(t - s.t_enter) <= eps || std::abs(t - s.t_exit) <= eps;
        }
        bad += want != have && !near_end;
    }
    return bad;
}

std::vector<Span> normalize_spans(std::vector<Span> spans, double tol) {
    std::vector<Span> merged;
    for (const Span& s : spans) {
        if (!merged.empty() && s.t_enter - merged.back().t_exit < tol)
            merged.back().t_exit = std::max(merged.back().t_exit, s.t_exit);
        else
            merged.push_back(s);
    }
    std::erase_if(merged, [tol](const Span& s) { return s.t_exit - s.t_enter < tol; });
    return merged;
}

bool spans_match(const std::vector<Span>& a, const std::vector<Span>& b, double eps) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i].t_enter - b[i].t_enter) > eps || std::abs(a[i].t_exit - b[i].t_exit) > eps)
            return false;
    return true;
}

std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& grid, int k) {
    std::vector<std::uint8_t> out(grid.size(), 0);
    auto at = [&](int x, int y, int z) -> int {
        if (x < 0 || y < 0 || z < 0 || x >= k || y >= k || z >= k)
            return 0;
        return grid[(x * k + y) * k + z];
    };
    for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y)
            for (int z = 0; z < k; ++z) {
                int count = 0;
                for (int dx = -1; dx <= 1; ++dx)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dz = -1; dz <= 1; ++dz)
                            count += at(x + dx, y + dy, z + dz);
                out[(x * k + y) * k + z] = count >= 27 * 0.1 ? 1 : 0;
            }
    return out;
}

double focal_loss(const std::vector<double>& prob, const std::vector<std::uint8_t>& gt, double gamma) {
    const double eps = 1e-7;
    double sum = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double o = std::min(std::max(prob[i], eps), 1.0 - eps);
        const double p = gt[i] ? o : 1.0 - o;
        sum -= std::pow(1.0 - p, gamma) * std::log(p);
    }
    return sum;
}

double mean_nearest(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double total = 0.0;
    for (const Vec3& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& b : to)
            best = std::min(best, (a - b).squaredNorm());
        total += std::sqrt(best);
    }
    return total / static_cast<double>(from.size());
}

namespace {

std::vector<double> affine(const Affine& a, const std::vector<double>& x) {
    std::vector<double> y(a.out_dim());
    for (int r = 0; r < a.out_dim(); ++r) {
        double s = a.bias(r);
        for (int c = 0; c < a.in_dim(); ++c)
            s += a.weight(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

std::vector<double> softmax(const std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    std::vector<double> e(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        sum += e[i] = std::exp(z[i] - m);
    for (double& v : e)
        v /= sum;
    return e;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace

RenderReference render(const RaySampleFeatures& feats, const RendererWeights& w) {
    const auto n = static_cast<std::size_t>(feats.fr.rows());
    const auto d_in = static_cast<std::size_t>(feats.fr.cols());
    std::vector<double> token(w.token.data(), w.token.data() + w.token.size());
    const std::vector<double> q = affine(w.q, token);
    const double root_d = std::sqrt(static_cast<double>(q.size()));
    std::vector<std::vector<double>> rows(n, std::vector<double>(d_in));
    std::vector<double> color_logits(n), depth_logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d_in; ++c)
            rows[i][c] = feats.fr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        color_logits[i] = dot(q, affine(w.k, affine(w.occ_transform, rows[i]))) / root_d;
        depth_logits[i] = dot(q, affine(w.k, rows[i])) / root_d;
    }
    RenderReference ref;
    ref.color_weights = softmax(color_logits);
    ref.depth_weights = softmax(depth_logits);
    // pool the values v(f_i) themselves rather than v applied to the pooled input
    std::vector<double> pooled(w.v.out_dim(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> vi = affine(w.v, rows[i]);
        for (std::size_t c = 0; c < pooled.size(); ++c)
            pooled[c] += ref.color_weights[i] * vi[c];
    }
    std::vector<double> h = pooled;
    for (std::size_t j = 0; j < w.color_head.layers.size(); ++j) {
        h = affine(w.color_head.layers[j], h);
        const bool last = j + 1 == w.color_head.layers.size();
        for (double& v : h)
            v = last ? 1.0 / (1.0 + std::exp(-v)) : std::max(0.0, v);
    }
    ref.color = Vec3(h[0], h[1], h[2]);
    ref.depth = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        ref.depth += ref.depth_weights[i] * feats.ts[i];
    return ref;
}

RaySampleFeatures random_features(Rng& rng, int n, int dim) {
    RaySampleFeatures f;
    for (int i = 0; i < n; ++i)
        f.ts.push_back(rng.uniform(1, 3));
    std::sort(f.ts.begin(), f.ts.end());
    f.fr = MatrixX::NullaryExpr(n, dim, [&] { return rng.uniform(-1, 1); });
    return f;
}

RendererLayout small_layout(Rng& rng) {
    RendererLayout layout;
    layout.volume_channels = rng.integer(1, 6);
    layout.projection_channels = 2 * rng.integer(1, 3);
    layout.pos_enc_bands = rng.integer(1, 3);
    layout.token_dim = rng.integer(2, 6);
    layout.attention_dim = rng.integer(2, 8);
    layout.value_dim = rng.integer(2, 8);
    layout.hidden = {rng.integer(3, 8)};
    layout.identity_occ = rng.uniform() < 0.5;
    return layout;
}

RenderFixture random_fixture(Rng& rng, int dim, int rays) {
    RenderFixture fx;
    for (int r = 0; r < rays; ++r) {
        fx.rays.push_back(random_features(rng, rng.integer(1, 8), dim));
        fx.gt_color.push_back(rng.vec(0, 1));
        if (rng.uniform() < 0.33)
            fx.gt_depth.push_back(std::nullopt);
        else
            fx.gt_depth.push_back(rng.uniform(1, 3));
    }
    fx.alpha = rng.uniform(0.5, 1.5);
    return fx;
}

void integrate(TsdfVolume& vol, const DepthMap& depth, const Camera& camera) {
    const PinholeDecomposition d = camera.decompose();
    const Index3 r = vol.resolution();
    const double trunc = vol.truncation();
    for (int i = 0; i < r.x(); ++i)
        for (int j = 0; j < r.y(); ++j)
            for (int k = 0; k < r.z(); ++k) {
                const Vec3 cam = d.rotation * vol.center(i, j, k) + d.translation;
                if (cam.z() <= 0.0)
                    continue;
                const Vec3 h = d.intrinsics * cam;
                const double u = h.x() / h.z();
                const double v = h.y() / h.z();
                if (u < -0.5 || v < -0.5 || u >= depth.width() - 0.5 || v >= depth.height() - 0.5)
                    continue;
                const int x = static_cast<int>(std::floor(u + 0.5));
                const int y = static_cast<int>(std::floor(v + 0.5));
                if (!depth.valid(x, y))
                    continue;
                const double sd = depth.at(x, y) - cam.z();
                if (sd < -trunc)
                    continue;
                const double obs = std::min(1.0, std::max(-1.0, sd / trunc));
                const std::int64_t idx = vol.index(i, j, k);
                const double w = vol.weight(idx);
                vol.set(idx, (vol.tsdf(idx) * w + obs) / (w + 1.0), static_cast<float>(w + 1.0));
            }
}

Camera random_camera(Rng& rng, const Vec3& target, int width, int height) {
    const Vec3 eye = target + rng.uniform(2.0, 4.0) * rng.direction();
    const Vec3 z = (target - eye).normalized();
    Vec3 helper = rng.direction();
    while (std::abs(helper.dot(z)) > 0.9)
        helper = rng.direction();
    const Vec3 x = helper.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Eigen::Matrix3d rot;
    rot.row(0) = x.transpose();
    rot.row(1) = y.transpose();
    rot.row(2) = z.transpose();
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = rng.uniform(0.8, 1.2) * width;
    k(1, 1) = rng.uniform(0.8, 1.2) * width;
    k(0, 2) = 0.5 * (width - 1) + rng.uniform(-2.0, 2.0);
    k(1, 2) = 0.5 * (height - 1) + rng.uniform(-2.0, 2.0);
    return Camera::from_pinhole(k, rot, -rot * eye, width, height);
}

} // namespace oracle
