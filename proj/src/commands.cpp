// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#include "svol/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "svol/errors.hpp"
#include "svol/features.hpp"
#include "svol/fusion.hpp"
#include "svol/json_io.hpp"
#include "svol/metrics.hpp"
#include "svol/occupancy.hpp"
#include "svol/ray_sampling.hpp"
#include "svol/renderer.hpp"
#include "svol/sparse_volume.hpp"
#include "svol/synthetic.hpp"
#include "svol/tensorio.hpp"

namespace svol {

namespace fs = std::filesystem;

namespace {

Json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Json index_json(const Index3& v) { return {v.x(), v.y(), v.z()}; }

Json memory_json(const MemoryReport& m) {
    return {{"payload_bytes", m.payload_bytes},
            {"lookup_bytes", m.lookup_bytes},
            {"sparse_bytes", m.sparse_bytes},
            {"dense_equivalent_bytes", m.dense_equivalent_bytes},
            {"ratio", m.ratio},
            {"payload_ratio", m.payload_ratio}};
}

void print(std::ostream& out, const Json& j, bool as_json) {
    if (as_json) {
        out << j.dump(2) << '\n';
        return;
    }
    for (const auto& [key, value] : j.items()) {
        if (value.is_string())
            out << key << ": " << value.get<std::string>() << '\n';
        else
            out << key << ": " << value.dump() << '\n';
    }
}

void require_grid_shape(const SceneConfig& config, const Tensor& t, const std::string& what) {
    const Index3 k = config.coarse_resolution;
    if (t.shape() != Shape{static_cast<std::uint64_t>(k.x()), static_cast<std::uint64_t>(k.y()),
                           static_cast<std::uint64_t>(k.z())})
        throw ConfigError(what + " shape does not match coarse_resolution " + std::to_string(k.x()) + "x" +
                          std::to_string(k.y()) + "x" + std::to_string(k.z()));
}

std::vector<Camera> load_cameras(const SceneConfig& config) {
    require_file(config.cameras, "cameras");
    return read_cameras(config.cameras);
}

std::vector<FeatureMap> load_features(const SceneConfig& config, std::size_t views) {
    require_file(config.features, "features");
    const Tensor t = read_tensor(config.features);
    if (t.rank() != 4 || t.shape()[0] != views)
        throw ConfigError("features must be an [M, C, H, W] tensor with one map per camera (" + std::to_string(views) +
                          ")");
    return feature_maps_from_tensor(t, config.feature_scale);
}

// Unset truncation means two fine-voxel edges of the sparse grid, independent of the TSDF resolution.
double default_truncation(const SceneConfig& c) {
    return c.tsdf_truncation > 0.0 ? c.tsdf_truncation : kDefaultTruncationVoxels * c.grid().fine_edge().maxCoeff();
}

std::string view_name(int v, bool shifted) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "view_%03d%s", v, shifted ? "_virtual" : "");
    return buf;
}

} // namespace

int run_guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const FormatError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const DomainError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const BudgetExceeded& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

std::string occupancy_report_line(double recall, double space_efficiency) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << "Recall " << 100.0 * recall << ", Space Efficiency "
      << std::setprecision(2) << 100.0 * space_efficiency;
    return s.str();
}

void cmd_occupancy(const OccupancyCommand& cmd, std::ostream& out, std::ostream& err) {
    const SceneConfig& c = cmd.config;
    require_file(c.logits, "occupancy logits");
    if (cmd.output.empty())
        throw ConfigError("no output path given");
    const GridSpec spec = c.grid();
    const Tensor input = read_tensor(c.logits);
    require_grid_shape(c, input, "logits");
    const OccupancyField prob = cmd.probabilities ? occupancy_from_tensor(spec, input)
                                                  : probabilities_from_logits(spec, input);
    if (prob.kind() != OccupancyKind::Probability)
        throw ConfigError("occupancy input must hold logits or probabilities, not labels");
    const OccupancyField binary = binarize(prob, c.tau);
    const OccupancyField occ = dilate(binary, DilationOptions{c.dilation_union});
    write_tensor(cmd.output, to_tensor(occ));

    Json report{{"output", cmd.output.generic_string()},
                {"occupied", occ.occupied_count()},
                {"total", occ.size()},
                {"space_efficiency", static_cast<double>(occ.occupied_count()) / static_cast<double>(occ.size())}};
    if (occ.occupied_count() == 0)
        err << "warning: no voxel reaches tau = " << c.tau << "; the occupancy field is empty\n";
    if (!c.gt_occupancy.empty()) {
        require_file(c.gt_occupancy, "ground-truth occupancy");
        const Tensor gt_t = read_tensor(c.gt_occupancy);
        require_grid_shape(c, gt_t, "ground-truth occupancy");
        const OccupancyField gt = occupancy_from_tensor(spec, gt_t);
        if (gt.kind() != OccupancyKind::Binary)
            throw ConfigError("ground-truth occupancy must be a u8 label tensor");
        const OccupancyMetrics m = occupancy_metrics(occ, gt);
        report["precision"] = m.precision;
        report["recall"] = m.recall;
        report["true_positives"] = m.true_positives;
        report["false_positives"] = m.false_positives;
        report["false_negatives"] = m.false_negatives;
        report["focal_loss"] = focal_loss(prob, gt, c.gamma);
        report["report"] = occupancy_report_line(m.recall, m.space_efficiency);
    }
    print(out, report, cmd.json);
}

void cmd_build(const BuildCommand& cmd, std::ostream& out, std::ostream& err) {
    const SceneConfig& c = cmd.config;
    require_file(c.occupancy, "occupancy");
    if (cmd.output.empty())
        throw ConfigError("no output bundle directory given");
    const GridSpec spec = c.grid();
    const Tensor occ_t = read_tensor(c.occupancy);
    require_grid_shape(c, occ_t, "occupancy");
    const OccupancyField occ = occupancy_from_tensor(spec, occ_t);
    if (occ.kind() != OccupancyKind::Binary)
        throw ConfigError("build needs binary occupancy (run the occupancy command first)");
    const std::vector<Camera> cameras = load_cameras(c);
    const std::vector<FeatureMap> maps = load_features(c, cameras.size());
    if (occ.occupied_count() == 0)
        err << "warning: occupancy is empty; writing a bundle with no mini-volumes\n";
    const SparseFeatureVolume vol = build_sparse_volume(occ, maps, cameras);
    write_bundle(cmd.output, vol);
    Json report{{"output", cmd.output.generic_string()},
                {"minivolumes", vol.minivolume_count()},
                {"channels", vol.channels()},
                {"memory", memory_json(memory_report(vol))}};
    print(out, report, cmd.json);
}

void cmd_render(const RenderCommand& cmd, std::ostream& out, std::ostream&) {
    const SceneConfig& c = cmd.config;
    require_file(c.bundle, "sparse volume bundle");
    require_file(c.bundle / "spec.json", "bundle spec");
    require_file(c.weights, "renderer weights");
    if (cmd.output_dir.empty())
        throw ConfigError("no output directory given");
    const SparseFeatureVolume vol = read_bundle(c.bundle);
    const RendererWeights weights = read_weights(c.weights);
    const std::vector<Camera> cameras = load_cameras(c);
    std::vector<FeatureMap> maps;
    if (weights.projection_channels > 0)
        maps = load_features(c, cameras.size());
    if (weights.volume_channels != vol.channels())
        throw ConfigError("weights expect " + std::to_string(weights.volume_channels) + " volume channels, bundle has " +
                          std::to_string(vol.channels()));

    std::vector<int> views = cmd.views;
    if (views.empty())
        for (int v = 0; v < static_cast<int>(cameras.size()); ++v)
            views.push_back(v);
    RenderOptions options;
    options.n_samples = c.n_samples;
    options.mode = c.sampling == "uniform" ? SamplingMode::uniform() : SamplingMode::stratified(c.seed);

    fs::create_directories(cmd.output_dir);
    Json entries = Json::array();
    for (const int v : views) {
        if (v < 0 || v >= static_cast<int>(cameras.size()))
            throw ConfigError("view " + std::to_string(v) + " is out of range");
        std::vector<std::pair<Camera, bool>> targets{{cameras[v], false}};
        if (cmd.virtual_views)
            targets.emplace_back(virtual_view(cameras[v], c.virtual_shift), true);
        for (const auto& [camera, shifted] : targets) {
            const RenderedView rv = render_view(camera, vol, maps, cameras, weights, options);
            const std::string name = view_name(v, shifted);
            write_pfm(cmd.output_dir / (name + ".pfm"), rv.depth);
            write_ppm(cmd.output_dir / (name + ".ppm"), camera.width(), camera.height(), rv.rgb);
            entries.push_back({{"view", v},
                               {"virtual", shifted},
                               {"depth", name + ".pfm"},
                               {"color", name + ".ppm"},
                               {"camera", camera_to_json(camera)},
                               {"valid_pixels", rv.depth.valid_count()}});
        }
    }
    write_json(cmd.output_dir / "views.json", Json{{"views", entries}});
    print(out, Json{{"output", cmd.output_dir.generic_string()}, {"rendered", entries.size()}}, cmd.json);
}

void cmd_fuse(const FuseCommand& cmd, std::ostream& out, std::ostream&) {
    const SceneConfig& c = cmd.config;
    if (cmd.output.empty())
        throw ConfigError("no output TSDF path given");
    if (cmd.depths.size() != cmd.cameras.size())
        throw ConfigError("--depth and --camera must be given in pairs");

    std::vector<std::pair<fs::path, Camera>> inputs;
    for (const fs::path& manifest : cmd.manifests) {
        require_file(manifest, "views manifest");
        const Json j = read_json(manifest);
        try {
            for (const Json& e : j.at("views")) {
                if (cmd.virtual_only && !e.value("virtual", false))
                    continue;
                inputs.emplace_back(manifest.parent_path() / e.at("depth").get<std::string>(),
                                    camera_from_json(e.at("camera")));
            }
        } catch (const Json::exception& e) {
            throw FormatError(manifest.string() + ": " + e.what());
        }
    }
    for (std::size_t i = 0; i < cmd.depths.size(); ++i) {
        require_file(cmd.cameras[i], "camera");
        const auto cams = read_cameras(cmd.cameras[i]);
        if (cams.size() != 1)
            throw ConfigError(cmd.cameras[i].string() + " must hold exactly one camera");
        inputs.emplace_back(cmd.depths[i], cams.front());
    }
    if (inputs.empty())
        throw ConfigError("fuse needs at least one depth map");

    TsdfVolume vol(c.bbox, c.tsdf_resolution, default_truncation(c));
    for (const auto& [path, camera] : inputs) {
        require_file(path, "depth map");
        integrate(vol, read_pfm(path), camera);
    }
    write_tsdf(cmd.output, vol);
    std::int64_t observed = 0;
    for (const float w : vol.weights())
        observed += w > 0.0f ? 1 : 0;
    print(out,
          Json{{"output", cmd.output.generic_string()},
               {"depth_maps", inputs.size()},
               {"resolution", c.tsdf_resolution},
               {"truncation", vol.truncation()},
               {"observed_voxels", observed}},
          cmd.json);
}

void cmd_mesh(const MeshCommand& cmd, std::ostream& out, std::ostream& err) {
    require_file(cmd.tsdf, "TSDF volume");
    if (cmd.output.empty())
        throw ConfigError("no output mesh path given");
    if (!(cmd.iso > -1.0 && cmd.iso < 1.0))
        throw ConfigError("iso must lie in (-1, 1)");
    const TsdfVolume vol = read_tsdf(cmd.tsdf);
    const TriangleMesh mesh = marching_cubes(vol, cmd.iso);
    if (mesh.faces.empty())
        err << "warning: no iso-surface crossing; writing an empty mesh\n";
    PlyWriteOptions options;
    options.encoding = cmd.ascii ? PlyEncoding::Ascii : PlyEncoding::BinaryLittleEndian;
    write_ply(cmd.output, mesh, options);
    print(out,
          Json{{"output", cmd.output.generic_string()},
               {"vertices", mesh.vertices.size()},
               {"faces", mesh.faces.size()},
               {"open_edges", count_boundary_or_nonmanifold_edges(mesh)}},
          cmd.json);
}

void cmd_eval(const EvalCommand& cmd, std::ostream& out, std::ostream&) {
    require_file(cmd.pred, "predicted mesh");
    require_file(cmd.gt, "ground-truth mesh");
    const TriangleMesh pred = read_ply(cmd.pred);
    const TriangleMesh gt = read_ply(cmd.gt);
    const auto pred_points = mesh_points(pred, cmd.density, cmd.seed);
    const auto gt_points = mesh_points(gt, cmd.density, cmd.seed);
    const ChamferReport cd = chamfer(pred_points, gt_points);
    Json report{{"accuracy", cd.accuracy},
                {"completeness", cd.completeness},
                {"chamfer", cd.chamfer},
                {"counts", {{"pred_points", cd.pred_points}, {"gt_points", cd.gt_points}}}};
    const bool normals = (!pred.faces.empty() || pred.has_normals()) && (!gt.faces.empty() || gt.has_normals());
    if (normals) {
        const NormalConsistencyReport nc =
            normal_consistency(pred, gt, NormalConsistencyOptions{cmd.max_angle, cmd.sign_agnostic});
        report["auc15"] = nc.auc;
        report["max_angle"] = cmd.max_angle;
        report["counts"]["normal_vertices"] = nc.angles.size();
        report["counts"]["degenerate_pred_normals"] = nc.degenerate_pred;
        report["counts"]["degenerate_gt_normals"] = nc.degenerate_gt;
    }
    print(out, report, cmd.json);
}

void cmd_bench(const BenchCommand& cmd, std::ostream& out, std::ostream& err) {
    if (cmd.resolutions.empty())
        throw ConfigError("bench needs at least one resolution");
    if (cmd.supersample < 1 || cmd.channels < 1 || cmd.queries < 1 || cmd.rays < 1)
        throw ConfigError("bench sizes must be positive");
    std::ostringstream csv;
    csv << "resolution,fraction,supersample,channels,minivolumes,dense_bytes,sparse_bytes,ratio,payload_ratio,"
           "query_ns_per_op,traversal_rays_per_s\n";
    const BoundingBox box(Vec3::Zero(), Vec3::Ones());
    for (const int k : cmd.resolutions) {
        if (k < 1)
            throw ConfigError("resolutions must be positive");
        const GridSpec spec(box, k, cmd.supersample);
        const OccupancyField occ = random_occupancy(spec, cmd.fraction, cmd.seed);
        const MemoryReport mem = memory_estimate(spec, cmd.channels, occ.occupied_count());
        if (mem.payload_bytes > (3ull << 30)) {
            err << "skipping K=" << k << ": payload would need " << mem.payload_bytes << " bytes\n";
            continue;
        }
        std::mt19937_64 rng(cmd.seed + static_cast<std::uint64_t>(k));
        auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        std::vector<float> payload(mem.payload_bytes / sizeof(float));
        for (float& v : payload)
            v = static_cast<float>(unit());
        const SparseFeatureVolume vol(build_lookup(occ), cmd.channels, std::move(payload));

        std::vector<Vec3> points(cmd.queries);
        for (Vec3& p : points)
            p = Vec3(unit(), unit(), unit());
        std::vector<float> feature(cmd.channels);
        double sink = 0.0;
        const auto q0 = std::chrono::steady_clock::now();
        for (const Vec3& p : points) {
            vol.query_into(p, feature);
            sink += feature[0];
        }
        const auto q1 = std::chrono::steady_clock::now();
        const double query_ns = std::chrono::duration<double, std::nano>(q1 - q0).count() / cmd.queries;

        std::vector<Ray> rays;
        rays.reserve(cmd.rays);
        for (int r = 0; r < cmd.rays; ++r) {
            const Vec3 target(unit(), unit(), unit());
            Vec3 dir(2 * unit() - 1, 2 * unit() - 1, 2 * unit() - 1);
            if (dir.norm() < 1e-3)
                dir = Vec3::UnitX();
            rays.emplace_back(target - 2.0 * dir.normalized(), dir);
        }
        std::size_t fragments = 0;
        const auto r0 = std::chrono::steady_clock::now();
        for (const Ray& ray : rays)
            fragments += traverse(ray, vol.lookup()).size();
        const auto r1 = std::chrono::steady_clock::now();
        const double rays_per_s = cmd.rays / std::max(std::chrono::duration<double>(r1 - r0).count(), 1e-12);
        if (sink == -1.0 && fragments == 0)
            err << "";

        csv << k << ',' << cmd.fraction << ',' << cmd.supersample << ',' << cmd.channels << ','
            << vol.minivolume_count() << ',' << mem.dense_equivalent_bytes << ',' << mem.sparse_bytes << ','
            << mem.ratio << ',' << mem.payload_ratio << ',' << query_ns << ',' << rays_per_s << '\n';
    }
    if (cmd.output.empty()) {
        out << csv.str();
    } else {
        std::ofstream f(cmd.output, std::ios::trunc);
        if (!f)
            throw ConfigError("cannot write " + cmd.output.string());
        f << csv.str();
        out << "wrote " << cmd.output.generic_string() << '\n';
    }
}

void cmd_inspect(const InspectCommand& cmd, std::ostream& out, std::ostream&) {
    require_file(cmd.bundle / "spec.json", "bundle spec");
    const SparseFeatureVolume vol = read_bundle(cmd.bundle);
    const GridSpec& spec = vol.spec();
    Json report{{"bundle", cmd.bundle.generic_string()},
                {"bbox", bbox_to_json(spec.bbox())},
                {"coarse_resolution", index_json(spec.coarse_resolution())},
                {"supersample", spec.supersample()},
                {"fine_resolution", index_json(spec.fine_resolution())},
                {"channels", vol.channels()},
                {"minivolumes", vol.minivolume_count()},
                {"occupancy_fraction",
                 static_cast<double>(vol.minivolume_count()) / static_cast<double>(spec.coarse_count())},
                {"memory", memory_json(memory_report(vol))}};
    print(out, report, cmd.json);
}

void cmd_fragments(const FragmentsCommand& cmd, std::ostream& out, std::ostream&) {
    const SceneConfig& c = cmd.config;
    const std::vector<Camera> cameras = load_cameras(c);
    if (cmd.view < 0 || cmd.view >= static_cast<int>(cameras.size()))
        throw ConfigError("view " + std::to_string(cmd.view) + " is out of range");
    std::optional<LookupTable> lookup;
    if (!c.bundle.empty()) {
        require_file(c.bundle / "spec.json", "bundle spec");
        lookup = read_bundle(c.bundle).lookup();
    } else {
        require_file(c.occupancy, "occupancy or bundle");
        const Tensor t = read_tensor(c.occupancy);
        require_grid_shape(c, t, "occupancy");
        lookup = build_lookup(occupancy_from_tensor(c.grid(), t));
    }
    const Ray ray = cameras[cmd.view].pixel_ray(Vec2(cmd.x, cmd.y));
    const auto frags = traverse(ray, *lookup);
    const SamplingMode mode = c.sampling == "uniform" ? SamplingMode::uniform() : SamplingMode::stratified(c.seed);
    const RaySampleBatch batch = sample(ray, frags, c.n_samples, mode);
    Json jf = Json::array();
    for (const Fragment& f : frags)
        jf.push_back({{"t_enter", f.t_enter},
                      {"t_exit", f.t_exit},
                      {"first", index_json(f.first)},
                      {"last", index_json(f.last)},
                      {"voxels", f.voxels}});
    out << Json{{"view", cmd.view},
                {"pixel", {cmd.x, cmd.y}},
                {"origin", vec_json(ray.origin())},
                {"direction", vec_json(ray.direction())},
                {"fragments", jf},
                {"samples", batch.ts}}
               .dump(2)
        << '\n';
}

void cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream&) {
    if (cmd.output_dir.empty())
        throw ConfigError("no output directory given");
    if (cmd.coarse_resolution < 1 || cmd.supersample < 1 || cmd.image_channels < 1 || cmd.image_size < 8 ||
        cmd.views < 1 || cmd.pos_enc_bands < 0 || cmd.tsdf_resolution < 2)
        throw ConfigError("synth sizes out of range");
    const fs::path dir = cmd.output_dir;
    fs::create_directories(dir / "gt_depth");

    SphereSceneOptions so;
    so.image_size = cmd.image_size;
    so.views = cmd.views;
    const SphereScene scene = make_sphere_scene(so);

    SceneConfig c;
    c.bbox = scene.bbox;
    c.coarse_resolution = Index3::Constant(cmd.coarse_resolution);
    c.supersample = cmd.supersample;
    c.image_channels = cmd.image_channels;
    c.pos_enc_bands = cmd.pos_enc_bands;
    c.tsdf_resolution = cmd.tsdf_resolution;
    c.virtual_shift = 0.025; // 25 mm in a meter-scale scene
    c.seed = cmd.seed;
    c.cameras = "cameras.json";
    c.features = "features.svt";
    c.logits = "logits.svt";
    c.gt_occupancy = "gt_occupancy.svt";
    c.occupancy = "occupancy.svt";
    c.bundle = "bundle";
    c.weights = "weights.json";
    const GridSpec spec = c.grid();

    write_cameras(dir / "cameras.json", scene.cameras);
    std::vector<DepthMap> depths;
    Json entries = Json::array();
    for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
        depths.push_back(render_sphere_depth(scene.cameras[v], scene.center, scene.radius));
        const std::string name = "gt_depth/" + view_name(static_cast<int>(v), false) + ".pfm";
        write_pfm(dir / name, depths.back());
        entries.push_back({{"view", v}, {"virtual", false}, {"depth", name}, {"camera", camera_to_json(scene.cameras[v])}});
    }
    write_json(dir / "gt_views.json", Json{{"views", entries}});
    write_tensor(dir / "gt_occupancy.svt", to_tensor(gt_occupancy(spec, depths, scene.cameras)));
    write_tensor(dir / "logits.svt", sphere_logits(spec, scene.center, scene.radius, 1.0, cmd.seed));
    write_tensor(dir / "features.svt", random_feature_tensor(static_cast<int>(scene.cameras.size()), cmd.image_channels,
                                                             cmd.image_size, cmd.image_size, cmd.seed + 1));
    write_ply(dir / "gt_mesh.ply", sphere_mesh(scene.center, scene.radius, 96, 192));

    RendererLayout layout;
    layout.volume_channels = 2 * cmd.image_channels;
    layout.projection_channels = 2 * cmd.image_channels;
    layout.pos_enc_bands = cmd.pos_enc_bands;
    layout.hidden = {32};
    write_weights(dir / "weights.json", random_weights(layout, cmd.seed + 2));
    save_scene_config(dir / "scene.json", c);
    print(out, Json{{"output", dir.generic_string()}, {"views", scene.cameras.size()}, {"config", "scene.json"}}, false);
}

} // namespace svol
