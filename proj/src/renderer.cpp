// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "svol/errors.hpp"
#include "svol/json_io.hpp"
#include "svol/parallel.hpp"

namespace svol {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

VectorX softmax(const VectorX& logits) {
    const double m = logits.maxCoeff();
    VectorX e = (logits.array() - m).exp().matrix();
    return e / e.sum();
}

bool all_finite(const MatrixX& m) { return m.allFinite(); }

void check_affine(const Affine& a, const char* name) {
    if (a.weight.rows() == 0 || a.weight.cols() == 0 || a.bias.size() != a.weight.rows())
        throw DomainError(std::string(name) + ": inconsistent affine map shape");
    if (!all_finite(a.weight) || !a.bias.allFinite())
        throw DomainError(std::string(name) + ": non-finite weights");
}

class Uniform {
  public:
    explicit Uniform(std::uint64_t seed) : rng_(seed) {}
    // portable across standard libraries, unlike std::uniform_real_distribution
    double operator()(double bound) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * bound;
    }

  private:
    std::mt19937_64 rng_;
};

Affine random_affine(Uniform& rng, int out, int in) {
    Affine a{MatrixX(out, in), VectorX(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < out; ++r)
        for (int c = 0; c < in; ++c)
            a.weight(r, c) = rng(bound);
    for (int r = 0; r < out; ++r)
        a.bias(r) = rng(bound);
    return a;
}

/// Head activations kept for the backward pass.
struct HeadTrace {
    std::vector<VectorX> inputs; // input of each layer
    std::vector<VectorX> pre;    // pre-activation of each layer
    VectorX output;
};

HeadTrace run_head(const Mlp& head, const VectorX& x) {
    HeadTrace tr;
    VectorX h = x;
    for (std::size_t j = 0; j < head.layers.size(); ++j) {
        tr.inputs.push_back(h);
        VectorX pre = head.layers[j].apply(h);
        tr.pre.push_back(pre);
        if (j + 1 < head.layers.size())
            h = pre.cwiseMax(0.0);
        else
            h = pre.unaryExpr([](double v) { return sigmoid(v); });
    }
    tr.output = h;
    return tr;
}

struct ForwardTrace {
    RenderOutput out;
    VectorX pooled_input; // sum_i a_i f^r_i
    HeadTrace head;
};

ForwardTrace forward(const RaySampleFeatures& feats, const RendererWeights& w) {
    ForwardTrace tr;
    const Eigen::Index n = feats.fr.rows();
    if (n == 0 || feats.ts.empty()) {
        tr.out.hit = false;
        return tr;
    }
    if (static_cast<Eigen::Index>(feats.ts.size()) != n)
        throw DomainError("sample count and feature rows disagree");
    if (feats.fr.cols() != w.input_dim())
        throw DomainError("sample features have " + std::to_string(feats.fr.cols()) + " columns, weights expect " +
                          std::to_string(w.input_dim()));

    const double scale = 1.0 / std::sqrt(static_cast<double>(w.attention_dim()));
    const VectorX query = w.q.apply(w.token);
    // rows: samples; k applied as (fr W^T + b)
    const MatrixX occ = (feats.fr * w.occ_transform.weight.transpose()).rowwise() + w.occ_transform.bias.transpose();
    const MatrixX key_occ = (occ * w.k.weight.transpose()).rowwise() + w.k.bias.transpose();
    const MatrixX key_r = (feats.fr * w.k.weight.transpose()).rowwise() + w.k.bias.transpose();
    const VectorX color_logits = key_occ * query * scale;
    const VectorX depth_logits = key_r * query * scale;

    tr.out.color_attention = softmax(color_logits);
    tr.out.depth_attention = softmax(depth_logits);
    tr.pooled_input = feats.fr.transpose() * tr.out.color_attention;
    // sum_i a_i (W f_i + b) = W (sum_i a_i f_i) + b since the weights sum to one
    const VectorX pooled = w.v.apply(tr.pooled_input);
    tr.head = run_head(w.color_head, pooled);
    tr.out.color = tr.head.output.head<3>();

    const auto [t_min, t_max] = std::minmax_element(feats.ts.begin(), feats.ts.end());
    double depth = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        depth += tr.out.depth_attention(i) * feats.ts[i];
    tr.out.depth = std::clamp(depth, *t_min, *t_max);
    tr.out.hit = true;
    return tr;
}

double fixture_loss(const RendererWeights& w, const RenderFixture& fx) {
    std::vector<RenderOutput> outs;
    outs.reserve(fx.rays.size());
    for (const auto& r : fx.rays)
        outs.push_back(forward(r, w).out);
    return loss(outs, fx.gt_color, fx.gt_depth, fx.alpha).total;
}

void put_affine(Json& tensors, const std::filesystem::path& dir, const std::string& key, const std::string& file_stem,
                const Affine& a) {
    const auto rows = static_cast<std::uint64_t>(a.weight.rows());
    const auto cols = static_cast<std::uint64_t>(a.weight.cols());
    std::vector<double> wt(rows * cols);
    for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < cols; ++c)
            wt[r * cols + c] = a.weight(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    std::vector<double> b(a.bias.data(), a.bias.data() + a.bias.size());
    write_tensor(dir / (file_stem + ".weight.svt"), Tensor::from<double>({rows, cols}, wt));
    write_tensor(dir / (file_stem + ".bias.svt"), Tensor::from<double>({rows}, b));
    tensors[key] = {{"weight", file_stem + ".weight.svt"}, {"bias", file_stem + ".bias.svt"}};
}

void put_vector(Json& tensors, const std::filesystem::path& dir, const std::string& key, const std::string& file_stem,
                const VectorX& v) {
    std::vector<double> values(v.data(), v.data() + v.size());
    write_tensor(dir / (file_stem + ".svt"), Tensor::from<double>({static_cast<std::uint64_t>(values.size())}, values));
    tensors[key] = file_stem + ".svt";
}

std::vector<double> load_values(const std::filesystem::path& path, const Shape& shape) {
    const Tensor t = read_tensor(path);
    if (t.shape() != shape)
        throw FormatError(path.filename().string() + ": unexpected shape");
    if (t.dtype() == DType::F32) {
        const auto f = t.values<float>();
        return {f.begin(), f.end()};
    }
    return t.values<double>();
}

MatrixX load_matrix(const std::filesystem::path& path, std::uint64_t rows, std::uint64_t cols) {
    const auto v = load_values(path, {rows, cols});
    MatrixX m(rows, cols);
    for (std::uint64_t r = 0; r < rows; ++r)
        for (std::uint64_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r * cols + c];
    return m;
}

VectorX load_vector(const std::filesystem::path& path, std::uint64_t n) {
    const auto v = load_values(path, {n});
    return Eigen::Map<const VectorX>(v.data(), static_cast<Eigen::Index>(n));
}

Affine get_affine(const Json& manifest, const std::filesystem::path& dir, const std::string& name, int out, int in) {
    const Json& entry = manifest.at("tensors").at(name);
    return Affine{load_matrix(dir / entry.at("weight").get<std::string>(), out, in),
                  load_vector(dir / entry.at("bias").get<std::string>(), out)};
}

} // namespace

Affine Affine::identity(int dim) { return Affine{MatrixX::Identity(dim, dim), VectorX::Zero(dim)}; }

VectorX Mlp::apply(const VectorX& x) const { return run_head(*this, x).output; }

void RendererWeights::validate() const {
    check_affine(q, "q");
    check_affine(k, "k");
    check_affine(v, "v");
    check_affine(occ_transform, "occ_transform");
    if (color_head.layers.empty())
        throw DomainError("color head needs at least one layer");
    for (const auto& layer : color_head.layers)
        check_affine(layer, "color_head");
    if (pos_enc_bands < 0 || volume_channels < 0 || projection_channels < 0)
        throw DomainError("negative renderer dimension");
    const int d_in = volume_channels + projection_channels + 6 * pos_enc_bands;
    if (d_in <= 0)
        throw DomainError("renderer input is empty");
    if (token.size() != q.in_dim() || !token.allFinite())
        throw DomainError("token does not match q");
    if (k.in_dim() != d_in || v.in_dim() != d_in)
        throw DomainError("k and v must take the " + std::to_string(d_in) + "-dimensional sample feature");
    if (occ_transform.in_dim() != d_in || occ_transform.out_dim() != d_in)
        throw DomainError("occ_transform must map the sample feature to itself");
    if (q.out_dim() != k.out_dim())
        throw DomainError("q and k must share the attention dimension");
    if (color_head.in_dim() != v.out_dim())
        throw DomainError("color head input must match v");
    for (std::size_t j = 1; j < color_head.layers.size(); ++j)
        if (color_head.layers[j].in_dim() != color_head.layers[j - 1].out_dim())
            throw DomainError("color head layers do not chain");
    if (color_head.out_dim() != 3)
        throw DomainError("color head must produce RGB");
    if (projection_attention) {
        const auto& a = *projection_attention;
        if (projection_channels % 2 != 0 || a.key.cols() * 2 != projection_channels || a.key.rows() == 0 ||
            a.key_bias.size() != a.key.rows() || a.query.size() != a.key.rows())
            throw DomainError("projection attention shape does not match the projection channels");
        if (!a.key.allFinite() || !a.key_bias.allFinite() || !a.query.allFinite())
            throw DomainError("projection attention has non-finite weights");
    }
}

RendererWeights random_weights(const RendererLayout& layout, std::uint64_t seed) {
    Uniform rng(seed);
    const int d_in = layout.input_dim();
    RendererWeights w;
    w.pos_enc_bands = layout.pos_enc_bands;
    w.volume_channels = layout.volume_channels;
    w.projection_channels = layout.projection_channels;
    w.token = VectorX(layout.token_dim);
    for (int i = 0; i < layout.token_dim; ++i)
        w.token(i) = rng(1.0);
    w.q = random_affine(rng, layout.attention_dim, layout.token_dim);
    w.k = random_affine(rng, layout.attention_dim, d_in);
    w.v = random_affine(rng, layout.value_dim, d_in);
    w.occ_transform = layout.identity_occ ? Affine::identity(d_in) : random_affine(rng, d_in, d_in);
    int prev = layout.value_dim;
    for (const int h : layout.hidden) {
        w.color_head.layers.push_back(random_affine(rng, h, prev));
        prev = h;
    }
    w.color_head.layers.push_back(random_affine(rng, 3, prev));
    w.validate();
    return w;
}

void write_weights(const std::filesystem::path& manifest_path, const RendererWeights& w) {
    w.validate();
    const std::filesystem::path dir = manifest_path.parent_path().empty() ? "." : manifest_path.parent_path();
    std::filesystem::create_directories(dir);
    const std::string stem = manifest_path.stem().string();
    Json m;
    m["format"] = "svol-renderer";
    m["version"] = 1;
    m["pos_enc_bands"] = w.pos_enc_bands;
    m["volume_channels"] = w.volume_channels;
    m["projection_channels"] = w.projection_channels;
    m["token_dim"] = w.token.size();
    m["attention_dim"] = w.attention_dim();
    m["value_dim"] = w.v.out_dim();
    Json sizes = Json::array();
    for (const auto& layer : w.color_head.layers)
        sizes.push_back(layer.out_dim());
    m["color_head"] = sizes;

    Json tensors;
    put_vector(tensors, dir, "token", stem + ".token", w.token);
    put_affine(tensors, dir, "q", stem + ".q", w.q);
    put_affine(tensors, dir, "k", stem + ".k", w.k);
    put_affine(tensors, dir, "v", stem + ".v", w.v);
    put_affine(tensors, dir, "occ_transform", stem + ".occ", w.occ_transform);
    for (std::size_t j = 0; j < w.color_head.layers.size(); ++j)
        put_affine(tensors, dir, "head" + std::to_string(j), stem + ".head" + std::to_string(j), w.color_head.layers[j]);
    if (w.projection_attention) {
        const auto& a = *w.projection_attention;
        put_affine(tensors, dir, "proj_key", stem + ".proj_key", Affine{a.key, a.key_bias});
        put_vector(tensors, dir, "proj_query", stem + ".proj_query", a.query);
        m["projection_attention_dim"] = a.key.rows();
    }
    m["tensors"] = tensors;
    write_json(manifest_path, m);
}

RendererWeights read_weights(const std::filesystem::path& manifest_path) {
    const Json m = read_json(manifest_path);
    const std::filesystem::path dir = manifest_path.parent_path().empty() ? "." : manifest_path.parent_path();
    try {
        if (m.value("format", std::string()) != "svol-renderer")
            throw FormatError("not a renderer weights manifest");
        RendererWeights w;
        w.pos_enc_bands = m.at("pos_enc_bands").get<int>();
        w.volume_channels = m.at("volume_channels").get<int>();
        w.projection_channels = m.at("projection_channels").get<int>();
        const int d_in = w.volume_channels + w.projection_channels + 6 * w.pos_enc_bands;
        const int token_dim = m.at("token_dim").get<int>();
        const int att = m.at("attention_dim").get<int>();
        const int val = m.at("value_dim").get<int>();
        if (d_in <= 0 || token_dim <= 0 || att <= 0 || val <= 0)
            throw FormatError("renderer dimensions must be positive");
        const Json& t = m.at("tensors");
        w.token = load_vector(dir / t.at("token").get<std::string>(), token_dim);
        w.q = get_affine(m, dir, "q", att, token_dim);
        w.k = get_affine(m, dir, "k", att, d_in);
        w.v = get_affine(m, dir, "v", val, d_in);
        w.occ_transform = get_affine(m, dir, "occ_transform", d_in, d_in);
        int prev = val;
        const auto sizes = m.at("color_head").get<std::vector<int>>();
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            w.color_head.layers.push_back(get_affine(m, dir, "head" + std::to_string(j), sizes[j], prev));
            prev = sizes[j];
        }
        if (t.contains("proj_key")) {
            const int a = m.at("projection_attention_dim").get<int>();
            const Affine key = get_affine(m, dir, "proj_key", a, w.projection_channels / 2);
            w.projection_attention =
                ProjectionAttention{key.weight, key.bias, load_vector(dir / t.at("proj_query").get<std::string>(), a)};
        }
        w.validate();
        return w;
    } catch (const Json::exception& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw FormatError(manifest_path.string() + ": " + e.what());
    }
}

VectorX positional_encoding(double x, int bands) {
    VectorX out(2 * bands);
    double freq = std::numbers::pi;
    for (int j = 0; j < bands; ++j) {
        out(2 * j) = std::sin(freq * x);
        out(2 * j + 1) = std::cos(freq * x);
        freq *= 2.0;
    }
    return out;
}

VectorX positional_encoding(const Vec3& point, const BoundingBox& bbox, int bands) {
    VectorX out(6 * bands);
    const Vec3 normalized = 2.0 * (point - bbox.min_corner()).cwiseQuotient(bbox.extent()) - Vec3::Ones();
    for (int a = 0; a < 3; ++a)
        out.segment(2 * bands * a, 2 * bands) = positional_encoding(normalized[a], bands);
    return out;
}

ProjectionFeature attention_pool(const MatrixX& views, const ProjectionAttention& attention) {
    const Eigen::Index c = views.cols();
    ProjectionFeature out{std::vector<float>(2 * c, 0.0f), views.rows() > 0};
    if (views.rows() == 0)
        return out;
    const double scale = 1.0 / std::sqrt(static_cast<double>(attention.key.rows()));
    const MatrixX keys = (views * attention.key.transpose()).rowwise() + attention.key_bias.transpose();
    const VectorX weights = softmax(keys * attention.query * scale);
    const VectorX mean = views.transpose() * weights;
    const MatrixX centered = views.rowwise() - mean.transpose();
    const VectorX var = centered.array().square().matrix().transpose() * weights;
    for (Eigen::Index i = 0; i < c; ++i) {
        out.values[i] = static_cast<float>(mean(i));
        out.values[c + i] = static_cast<float>(std::max(0.0, var(i)));
    }
    return out;
}

ProjectionFeature aggregate_projection_feature(const Vec3& point, std::span<const FeatureMap> maps,
                                               std::span<const Camera> cameras,
                                               const std::optional<ProjectionAttention>& attention) {
    const int c_img = check_views(maps, cameras);
    if (!attention) {
        ProjectionFeature out{std::vector<float>(2 * c_img), false};
        out.valid = aggregate_at_into(point, maps, cameras, out.values);
        return out;
    }
    if (attention->key.cols() != c_img)
        throw DomainError("projection attention key does not match the feature channels");
    std::vector<float> sample(c_img);
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t v = 0; v < maps.size(); ++v)
        if (sample_feature_into(maps[v], cameras[v], point, sample))
            rows.push_back(Eigen::Map<const Eigen::VectorXf>(sample.data(), c_img).cast<double>());
    MatrixX views(static_cast<Eigen::Index>(rows.size()), c_img);
    for (std::size_t r = 0; r < rows.size(); ++r)
        views.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    return attention_pool(views, *attention);
}

RaySampleFeatures gather_features(const RaySampleBatch& batch, const SparseFeatureVolume& volume,
                                  std::span<const FeatureMap> maps, std::span<const Camera> cameras,
                                  const RendererWeights& w) {
    if (volume.channels() != w.volume_channels)
        throw DomainError("volume has " + std::to_string(volume.channels()) + " channels, weights expect " +
                          std::to_string(w.volume_channels));
    if (w.projection_channels > 0 && 2 * check_views(maps, cameras) != w.projection_channels)
        throw DomainError("projection features do not match the weights");
    RaySampleFeatures f;
    f.ts = batch.ts;
    const auto n = static_cast<Eigen::Index>(batch.ts.size());
    f.fr.resize(n, w.input_dim());
    std::vector<float> vol(w.volume_channels);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3 p = batch.point(static_cast<std::size_t>(i));
        volume.query_into(p, vol);
        for (int c = 0; c < w.volume_channels; ++c)
            f.fr(i, c) = vol[c];
        if (w.projection_channels > 0) {
            const ProjectionFeature proj = aggregate_projection_feature(p, maps, cameras, w.projection_attention);
            for (int c = 0; c < w.projection_channels; ++c)
                f.fr(i, w.volume_channels + c) = proj.values[c];
        }
        if (w.pos_enc_bands > 0)
            f.fr.row(i).tail(6 * w.pos_enc_bands) =
                positional_encoding(p, volume.spec().bbox(), w.pos_enc_bands).transpose();
    }
    return f;
}

RenderOutput render_ray(const RaySampleFeatures& feats, const RendererWeights& weights) {
    return forward(feats, weights).out;
}

LossTerms loss(std::span<const RenderOutput> rendered, std::span<const Vec3> gt_color,
               std::span<const std::optional<double>> gt_depth, double alpha) {
    if (rendered.size() != gt_color.size() || rendered.size() != gt_depth.size())
        throw DomainError("rendered rays and ground truth must be paired");
    LossTerms out;
    if (rendered.empty())
        return out;
    double depth_sum = 0.0;
    std::size_t valid = 0;
    for (std::size_t r = 0; r < rendered.size(); ++r) {
        out.color += (rendered[r].color - gt_color[r]).norm();
        if (gt_depth[r]) {
            depth_sum += std::abs(rendered[r].depth - *gt_depth[r]);
            ++valid;
        }
    }
    out.color /= static_cast<double>(rendered.size());
    out.depth = valid > 0 ? depth_sum / static_cast<double>(valid) : 0.0;
    out.total = out.color + alpha * out.depth;
    return out;
}

VectorX flatten_trainable(const RendererWeights& w) {
    std::vector<double> out;
    auto push = [&](const MatrixX& m) { out.insert(out.end(), m.data(), m.data() + m.size()); };
    push(w.v.weight);
    push(w.v.bias);
    for (const auto& layer : w.color_head.layers) {
        push(layer.weight);
        push(layer.bias);
    }
    return Eigen::Map<const VectorX>(out.data(), static_cast<Eigen::Index>(out.size()));
}

void unflatten_trainable(RendererWeights& w, const VectorX& params) {
    Eigen::Index pos = 0;
    auto pull = [&](auto& m) {
        if (pos + m.size() > params.size())
            throw DomainError("parameter vector is too short");
        std::copy(params.data() + pos, params.data() + pos + m.size(), m.data());
        pos += m.size();
    };
    pull(w.v.weight);
    pull(w.v.bias);
    for (auto& layer : w.color_head.layers) {
        pull(layer.weight);
        pull(layer.bias);
    }
    if (pos != params.size())
        throw DomainError("parameter vector is too long");
}

VectorX loss_gradient(const RendererWeights& w, const RenderFixture& fx) {
    RendererWeights grad = w;
    grad.v.weight.setZero();
    grad.v.bias.setZero();
    for (auto& layer : grad.color_head.layers) {
        layer.weight.setZero();
        layer.bias.setZero();
    }
    const double n_rays = static_cast<double>(fx.rays.size());
    for (std::size_t r = 0; r < fx.rays.size(); ++r) {
        const ForwardTrace tr = forward(fx.rays[r], w);
        if (!tr.out.hit)
            continue; // background color is constant
        const Vec3 diff = tr.out.color - fx.gt_color[r];
        const double norm = diff.norm();
        if (norm == 0.0)
            continue;
        VectorX upstream = diff / (norm * n_rays);
        const auto& layers = w.color_head.layers;
        for (std::size_t j = layers.size(); j-- > 0;) {
            VectorX delta;
            if (j + 1 == layers.size()) {
                const VectorX& y = tr.head.output;
                delta = upstream.cwiseProduct(y.cwiseProduct(VectorX::Ones(y.size()) - y));
            } else {
                delta = upstream.cwiseProduct(
                    tr.head.pre[j].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
            }
            grad.color_head.layers[j].weight += delta * tr.head.inputs[j].transpose();
            grad.color_head.layers[j].bias += delta;
            upstream = layers[j].weight.transpose() * delta;
        }
        grad.v.weight += upstream * tr.pooled_input.transpose();
        grad.v.bias += upstream;
    }
    VectorX g = flatten_trainable(grad);
    if (!g.allFinite())
        throw DomainError("non-finite gradient");
    return g;
}

GradCheckReport grad_check(const RendererWeights& weights, const RenderFixture& fixture, double epsilon) {
    const VectorX analytic = loss_gradient(weights, fixture);
    const VectorX params = flatten_trainable(weights);
    RendererWeights probe = weights;
    GradCheckReport report;
    report.parameters = static_cast<std::size_t>(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        VectorX p = params;
        p(i) = params(i) + epsilon;
        unflatten_trainable(probe, p);
        const double up = fixture_loss(probe, fixture);
        p(i) = params(i) - epsilon;
        unflatten_trainable(probe, p);
        const double down = fixture_loss(probe, fixture);
        const double numeric = (up - down) / (2.0 * epsilon);
        if (!std::isfinite(numeric))
            throw DomainError("non-finite finite-difference gradient");
        const double a = analytic(i);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        if (rel > report.max_relative_error) {
            report.max_relative_error = rel;
            report.worst_index = static_cast<std::size_t>(i);
        }
    }
    return report;
}

RenderedView render_view(const Camera& camera, const SparseFeatureVolume& volume, std::span<const FeatureMap> maps,
                         std::span<const Camera> cameras, const RendererWeights& weights, const RenderOptions& options) {
    weights.validate();
    const int width = camera.width();
    const int height = camera.height();
    RenderedView view{DepthMap(width, height), std::vector<float>(static_cast<std::size_t>(width) * height * 3, 0.0f)};
    const Vec3 axis = camera.principal_axis();
    std::vector<float> depth(static_cast<std::size_t>(width) * height, 0.0f);
    parallel_for(0, height, [&](std::int64_t y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t pixel = static_cast<std::size_t>(y) * width + x;
            const Ray ray = camera.pixel_ray(Vec2(x, static_cast<double>(y)));
            SamplingMode mode = options.mode;
            mode.seed = ray_seed(options.mode.seed, pixel);
            const RaySampleBatch batch = sample(ray, traverse(ray, volume.lookup()), options.n_samples, mode);
            if (batch.size() == 0)
                continue;
            const RenderOutput out = render_ray(gather_features(batch, volume, maps, cameras, weights), weights);
            if (!out.hit)
                continue;
            depth[pixel] = static_cast<float>(out.depth * ray.direction().dot(axis));
            for (int c = 0; c < 3; ++c)
                view.rgb[pixel * 3 + c] = static_cast<float>(out.color[c]);
        }
    });
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            view.depth.set(x, y, depth[static_cast<std::size_t>(y) * width + x]);
    return view;
}

} // namespace svol
