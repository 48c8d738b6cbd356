// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/occupancy.hpp"

#include <algorithm>
#include <cmath>

#include "svol/errors.hpp"
#include "svol/parallel.hpp"

namespace svol {

OccupancyField::OccupancyField(const GridSpec& spec, OccupancyKind kind, std::vector<float> values)
    : spec_(spec), kind_(kind), values_(std::move(values)) {
    if (static_cast<std::int64_t>(values_.size()) != spec_.coarse_count())
        throw DomainError("occupancy field size does not match the coarse grid");
}

OccupancyField OccupancyField::probability(const GridSpec& spec, std::vector<float> values) {
    for (const float v : values)
        if (!(v >= 0.0f && v <= 1.0f))
            throw DomainError("occupancy probabilities must lie in [0,1]");
    return OccupancyField(spec, OccupancyKind::Probability, std::move(values));
}

OccupancyField OccupancyField::binary(const GridSpec& spec, std::vector<std::uint8_t> values) {
    std::vector<float> f(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 1)
            throw DomainError("binary occupancy values must be 0 or 1");
        f[i] = static_cast<float>(values[i]);
    }
    return OccupancyField(spec, OccupancyKind::Binary, std::move(f));
}

OccupancyField OccupancyField::empty(const GridSpec& spec) {
    return OccupancyField(spec, OccupancyKind::Binary, std::vector<float>(spec.coarse_count(), 0.0f));
}

std::int64_t OccupancyField::occupied_count() const {
    return std::count_if(values_.begin(), values_.end(), [](float v) { return v != 0.0f; });
}

namespace {

void require_kind(const OccupancyField& f, OccupancyKind kind, const char* what) {
    if (f.kind() != kind)
        throw DomainError(std::string(what) + (kind == OccupancyKind::Binary ? " must be a binary occupancy field"
                                                                             : " must be a probability field"));
}

void require_same_grid(const OccupancyField& a, const OccupancyField& b) {
    if (!(a.spec() == b.spec()))
        throw DomainError("occupancy fields are defined on different grids");
}

} // namespace

OccupancyField gt_occupancy(const GridSpec& spec, std::span<const DepthMap> depth_maps, std::span<const Camera> cameras) {
    if (depth_maps.empty())
        throw DomainError("ground-truth occupancy needs at least one view");
    if (depth_maps.size() != cameras.size())
        throw DomainError("depth maps and cameras must be paired");
    std::vector<std::uint8_t> occ(spec.coarse_count(), 0);
    for (std::size_t v = 0; v < depth_maps.size(); ++v) {
        const DepthMap& depth = depth_maps[v];
        const Camera& cam = cameras[v];
        for (int y = 0; y < depth.height(); ++y)
            for (int x = 0; x < depth.width(); ++x) {
                if (!depth.valid(x, y))
                    continue;
                const Vec3 p = cam.unproject(Vec2(x, y), depth.at(x, y));
                if (const auto voxel = locate(spec, p, Frame::Occupancy))
                    occ[spec.coarse_index(*voxel)] = 1;
            }
    }
    return OccupancyField::binary(spec, std::move(occ));
}

double focal_loss(const OccupancyField& pred, const OccupancyField& gt, double gamma) {
    require_kind(pred, OccupancyKind::Probability, "prediction");
    require_kind(gt, OccupancyKind::Binary, "ground truth");
    require_same_grid(pred, gt);
    double loss = 0.0;
    for (std::int64_t i = 0; i < pred.size(); ++i) {
        const double o = std::clamp<double>(pred.value(i), kFocalEpsilon, 1.0 - kFocalEpsilon);
        const double p = gt.occupied(i) ? o : 1.0 - o;
        loss -= std::pow(1.0 - p, gamma) * std::log(p);
    }
    return loss;
}

OccupancyField binarize(const OccupancyField& pred, double tau) {
    require_kind(pred, OccupancyKind::Probability, "binarize input");
    if (!(tau > 0.0 && tau <= 1.0))
        throw DomainError("binarization threshold must lie in (0, 1]");
    std::vector<std::uint8_t> out(pred.size());
    for (std::int64_t i = 0; i < pred.size(); ++i)
        out[i] = pred.value(i) >= tau ? 1 : 0;
    return OccupancyField::binary(pred.spec(), std::move(out));
}

OccupancyField dilate(const OccupancyField& binary, const DilationOptions& options) {
    require_kind(binary, OccupancyKind::Binary, "dilate input");
    const Index3 n = binary.spec().coarse_resolution();
    const GridSpec& spec = binary.spec();

    // separable 3-tap box sums along z, then y, then x
    std::vector<int> a(binary.size()), b(binary.size());
    for (std::int64_t i = 0; i < binary.size(); ++i)
        a[i] = binary.occupied(i) ? 1 : 0;
    auto pass = [&](const std::vector<int>& src, std::vector<int>& dst, int axis) {
        parallel_for(0, binary.size(), [&](std::int64_t i) {
            const Index3 v = spec.coarse_coord(i);
            int sum = src[i];
            Index3 u = v;
            if (v[axis] > 0) {
                u[axis] = v[axis] - 1;
                sum += src[spec.coarse_index(u)];
            }
            if (v[axis] + 1 < n[axis]) {
                u[axis] = v[axis] + 1;
                sum += src[spec.coarse_index(u)];
            }
            dst[i] = sum;
        });
    };
    pass(a, b, 2);
    pass(b, a, 1);
    pass(a, b, 0);

    std::vector<std::uint8_t> out(binary.size());
    for (std::int64_t i = 0; i < binary.size(); ++i) {
        const bool keep = b[i] >= kDilationThreshold;
        out[i] = (keep || (options.union_with_input && binary.occupied(i))) ? 1 : 0;
    }
    return OccupancyField::binary(spec, std::move(out));
}

OccupancyMetrics occupancy_metrics(const OccupancyField& pred, const OccupancyField& gt) {
    require_kind(pred, OccupancyKind::Binary, "prediction");
    require_kind(gt, OccupancyKind::Binary, "ground truth");
    require_same_grid(pred, gt);
    OccupancyMetrics m;
    std::int64_t occupied = 0;
    for (std::int64_t i = 0; i < pred.size(); ++i) {
        const bool p = pred.occupied(i);
        const bool g = gt.occupied(i);
        occupied += p;
        m.true_positives += p && g;
        m.false_positives += p && !g;
        m.false_negatives += !p && g;
    }
    const auto tp = static_cast<double>(m.true_positives);
    const std::int64_t pred_pos = m.true_positives + m.false_positives;
    const std::int64_t gt_pos = m.true_positives + m.false_negatives;
    m.precision = pred_pos > 0 ? tp / static_cast<double>(pred_pos) : 0.0;
    m.recall = gt_pos > 0 ? tp / static_cast<double>(gt_pos) : 0.0;
    m.space_efficiency = static_cast<double>(occupied) / static_cast<double>(pred.size());
    return m;
}

Tensor to_tensor(const OccupancyField& field) {
    const Index3 n = field.spec().coarse_resolution();
    Shape shape = {static_cast<std::uint64_t>(n.x()), static_cast<std::uint64_t>(n.y()),
                   static_cast<std::uint64_t>(n.z())};
    if (field.kind() == OccupancyKind::Binary) {
        std::vector<std::uint8_t> v(field.size());
        for (std::int64_t i = 0; i < field.size(); ++i)
            v[i] = field.occupied(i) ? 1 : 0;
        return Tensor::from<std::uint8_t>(std::move(shape), v);
    }
    return Tensor::from<float>(std::move(shape), field.values());
}

namespace {

void require_grid_shape(const GridSpec& spec, const Tensor& tensor) {
    const Index3 n = spec.coarse_resolution();
    const Shape expected = {static_cast<std::uint64_t>(n.x()), static_cast<std::uint64_t>(n.y()),
                            static_cast<std::uint64_t>(n.z())};
    if (tensor.shape() != expected)
        throw DomainError("occupancy tensor shape does not match the coarse grid");
}

std::vector<double> as_doubles(const Tensor& tensor) {
    switch (tensor.dtype()) {
    case DType::F32: {
        const auto f = tensor.values<float>();
        return {f.begin(), f.end()};
    }
    case DType::F64:
        return tensor.values<double>();
    default:
        throw DomainError(std::string("expected a floating-point tensor, got ") + dtype_name(tensor.dtype()));
    }
}

} // namespace

OccupancyField occupancy_from_tensor(const GridSpec& spec, const Tensor& tensor) {
    require_grid_shape(spec, tensor);
    if (tensor.dtype() == DType::U8)
        return OccupancyField::binary(spec, tensor.values<std::uint8_t>());
    const auto d = as_doubles(tensor);
    return OccupancyField::probability(spec, std::vector<float>(d.begin(), d.end()));
}

OccupancyField probabilities_from_logits(const GridSpec& spec, const Tensor& logits) {
    require_grid_shape(spec, logits);
    const auto d = as_doubles(logits);
    std::vector<float> p(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        p[i] = static_cast<float>(1.0 / (1.0 + std::exp(-d[i])));
    return OccupancyField::probability(spec, std::move(p));
}

} // namespace svol
