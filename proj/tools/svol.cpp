// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
//
// svol command-line driver. Every subcommand reads the scene config given by --config;
// individual flags override config fields.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "svol/commands.hpp"
#include "svol/parallel.hpp"

namespace {

using svol::SceneConfig;

// Flags that override SceneConfig fields. Unset optionals leave the config value alone.
struct Overrides {
    std::string config;
    bool paper_scale = false;
    std::optional<int> coarse_resolution;
    std::optional<int> supersample;
    std::optional<double> tau;
    std::optional<double> gamma;
    bool dilation_union = false;
    std::optional<int> n_samples;
    std::optional<std::string> sampling;
    std::optional<double> tsdf_truncation;
    std::optional<int> tsdf_resolution;
    std::optional<double> virtual_shift;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> cameras, features, logits, gt_occupancy, occupancy, bundle, weights;

    SceneConfig resolve() const {
        SceneConfig c = config.empty() ? SceneConfig{} : svol::load_scene_config(config);
        if (paper_scale)
            c.apply_paper_scale();
        if (coarse_resolution)
            c.coarse_resolution = svol::Index3::Constant(*coarse_resolution);
        if (supersample)
            c.supersample = *supersample;
        if (tau)
            c.tau = *tau;
        if (gamma)
            c.gamma = *gamma;
        if (dilation_union)
            c.dilation_union = true;
        if (n_samples)
            c.n_samples = *n_samples;
        if (sampling)
            c.sampling = *sampling;
        if (tsdf_truncation)
            c.tsdf_truncation = *tsdf_truncation;
        if (tsdf_resolution)
            c.tsdf_resolution = *tsdf_resolution;
        if (virtual_shift)
            c.virtual_shift = *virtual_shift;
        if (seed)
            c.seed = *seed;
        auto path = [](std::filesystem::path& dst, const std::optional<std::string>& src) {
            if (src)
                dst = *src;
        };
        path(c.cameras, cameras);
        path(c.features, features);
        path(c.logits, logits);
        path(c.gt_occupancy, gt_occupancy);
        path(c.occupancy, occupancy);
        path(c.bundle, bundle);
        path(c.weights, weights);
        c.validate();
        return c;
    }
};

void add_config_flags(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config, "Scene config JSON");
    app->add_flag("--paper-scale", o.paper_scale, "Use K=128 instead of the desk default 32");
    app->add_option("--coarse-resolution", o.coarse_resolution, "Coarse grid resolution K");
    app->add_option("--supersample", o.supersample, "Supersampling factor s");
    app->add_option("--seed", o.seed, "Random seed");
    app->add_option("--cameras", o.cameras, "Cameras JSON");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse two-layer feature volumes: occupancy, sparse features, rendering, fusion, metrics"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    bool json = false;
    app.add_option("--threads", threads, "Worker threads (falls back to SVOL_THREADS, then the core count)");
    app.add_flag("--json", json, "Print results as JSON");

    Overrides o;

    svol::OccupancyCommand occ_cmd;
    std::string occ_out;
    auto* occ = app.add_subcommand("occupancy", "Binarize and dilate occupancy logits");
    add_config_flags(occ, o);
    occ->add_option("--logits", o.logits, "Occupancy logits .svt");
    occ->add_option("--gt", o.gt_occupancy, "Ground-truth occupancy .svt for metrics");
    occ->add_option("--tau", o.tau, "Binarization threshold");
    occ->add_option("--gamma", o.gamma, "Focal loss focusing parameter");
    occ->add_flag("--dilation-union", o.dilation_union, "Keep every input voxel after dilation");
    occ->add_flag("--probabilities", occ_cmd.probabilities, "Input holds probabilities, not logits");
    occ->add_option("-o,--output", occ_out, "Output binary occupancy .svt")->required();

    std::string build_out;
    auto* build = app.add_subcommand("build", "Build the sparse feature volume bundle");
    add_config_flags(build, o);
    build->add_option("--occupancy", o.occupancy, "Binary occupancy .svt");
    build->add_option("--features", o.features, "Feature maps .svt [M, C, H, W]");
    build->add_option("-o,--output", build_out, "Output bundle directory")->required();

    svol::RenderCommand render_cmd;
    std::string render_out;
    bool no_virtual = false;
    auto* render = app.add_subcommand("render", "Render depth and color for original and virtual views");
    add_config_flags(render, o);
    render->add_option("--bundle", o.bundle, "Sparse volume bundle directory");
    render->add_option("--weights", o.weights, "Renderer weights manifest");
    render->add_option("--features", o.features, "Feature maps .svt");
    render->add_option("--n-samples", o.n_samples, "Samples per ray");
    render->add_option("--sampling", o.sampling, "stratified or uniform")->check(CLI::IsMember({"stratified", "uniform"}));
    render->add_option("--virtual-shift", o.virtual_shift, "Virtual view shift along the camera x-axis");
    render->add_option("--view", render_cmd.views, "View indices (default: all)");
    render->add_flag("--no-virtual", no_virtual, "Skip the shifted virtual views");
    render->add_option("-o,--output", render_out, "Output directory")->required();

    svol::FuseCommand fuse_cmd;
    std::vector<std::string> fuse_manifests, fuse_depths, fuse_cameras;
    std::string fuse_out;
    auto* fuse = app.add_subcommand("fuse", "Fuse depth maps into a TSDF volume");
    add_config_flags(fuse, o);
    fuse->add_option("--views", fuse_manifests, "views.json manifests from render or synth");
    fuse->add_option("--depth", fuse_depths, "Depth map .pfm (pair with --camera)");
    fuse->add_option("--camera", fuse_cameras, "Single-camera JSON");
    fuse->add_flag("--virtual-only", fuse_cmd.virtual_only, "Fuse only the shifted views of each manifest");
    fuse->add_option("--tsdf-resolution", o.tsdf_resolution, "TSDF voxels per axis");
    fuse->add_option("--truncation", o.tsdf_truncation, "Truncation distance (<= 0: two fine-voxel edges of the feature grid)");
    fuse->add_option("-o,--output", fuse_out, "Output TSDF .svt")->required();

    svol::MeshCommand mesh_cmd;
    std::string mesh_in, mesh_out;
    auto* mesh = app.add_subcommand("mesh", "Extract the zero level set of a TSDF");
    mesh->add_option("tsdf", mesh_in, "TSDF .svt")->required();
    mesh->add_option("-o,--output", mesh_out, "Output .ply")->required();
    mesh->add_option("--iso", mesh_cmd.iso, "Iso level");
    mesh->add_flag("--ascii", mesh_cmd.ascii, "Write ASCII PLY");

    svol::EvalCommand eval_cmd;
    std::string eval_pred, eval_gt;
    auto* eval = app.add_subcommand("eval", "Chamfer distance and normal consistency between two meshes");
    eval->add_option("pred", eval_pred, "Predicted mesh .ply")->required();
    eval->add_option("gt", eval_gt, "Ground-truth mesh .ply")->required();
    eval->add_option("--density", eval_cmd.density, "Extra surface samples per unit area");
    eval->add_option("--max-angle", eval_cmd.max_angle, "AUC angle limit in degrees");
    eval->add_flag("--sign-agnostic", eval_cmd.sign_agnostic, "Ignore normal orientation");
    eval->add_option("--seed", eval_cmd.seed, "Surface sampling seed");

    svol::BenchCommand bench_cmd;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Memory and latency benchmark over coarse resolutions");
    bench->add_option("--resolutions", bench_cmd.resolutions, "Coarse resolutions");
    bench->add_option("--fraction", bench_cmd.fraction, "Occupied fraction")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--supersample", bench_cmd.supersample, "Supersampling factor");
    bench->add_option("--channels", bench_cmd.channels, "Feature channels");
    bench->add_option("--queries", bench_cmd.queries, "Random point queries per resolution");
    bench->add_option("--rays", bench_cmd.rays, "Random rays per resolution");
    bench->add_option("--seed", bench_cmd.seed, "Workload seed");
    bench->add_option("-o,--output", bench_out, "CSV path (default: stdout)");

    svol::InspectCommand inspect_cmd;
    std::string inspect_in;
    auto* inspect = app.add_subcommand("inspect", "Print sparse volume bundle statistics");
    inspect->add_option("bundle", inspect_in, "Bundle directory")->required();

    svol::FragmentsCommand frag_cmd;
    auto* frags = app.add_subcommand("fragments", "Print the occupied fragments and samples of one pixel ray");
    add_config_flags(frags, o);
    frags->add_option("--occupancy", o.occupancy, "Binary occupancy .svt");
    frags->add_option("--bundle", o.bundle, "Bundle directory (used instead of --occupancy)");
    frags->add_option("--view", frag_cmd.view, "Camera index");
    frags->add_option("--x", frag_cmd.x, "Pixel x")->required();
    frags->add_option("--y", frag_cmd.y, "Pixel y")->required();
    frags->add_option("--n-samples", o.n_samples, "Samples per ray");

    svol::SynthCommand synth_cmd;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a synthetic sphere scene with every input file");
    synth->add_option("-o,--output", synth_out, "Output directory")->required();
    synth->add_option("--coarse-resolution", synth_cmd.coarse_resolution, "Coarse grid resolution");
    synth->add_option("--supersample", synth_cmd.supersample, "Supersampling factor");
    synth->add_option("--image-channels", synth_cmd.image_channels, "Feature channels per view");
    synth->add_option("--image-size", synth_cmd.image_size, "Image width and height");
    synth->add_option("--views", synth_cmd.views, "Number of cameras");
    synth->add_option("--tsdf-resolution", synth_cmd.tsdf_resolution, "TSDF resolution");
    synth->add_option("--seed", synth_cmd.seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return svol::kExitConfig;
    }

    if (threads <= 0) {
        if (const char* env = std::getenv("SVOL_THREADS"))
            threads = std::atoi(env);
    }
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    svol::set_thread_count(threads);

    auto& out = std::cout;
    auto& err = std::cerr;
    return svol::run_guarded(
        [&] {
            if (*occ) {
                occ_cmd.config = o.resolve();
                occ_cmd.output = occ_out;
                occ_cmd.json = json;
                svol::cmd_occupancy(occ_cmd, out, err);
            } else if (*build) {
                svol::BuildCommand cmd{o.resolve(), build_out, json};
                svol::cmd_build(cmd, out, err);
            } else if (*render) {
                render_cmd.config = o.resolve();
                render_cmd.output_dir = render_out;
                render_cmd.virtual_views = !no_virtual;
                render_cmd.json = json;
                svol::cmd_render(render_cmd, out, err);
            } else if (*fuse) {
                fuse_cmd.config = o.resolve();
                fuse_cmd.manifests.assign(fuse_manifests.begin(), fuse_manifests.end());
                fuse_cmd.depths.assign(fuse_depths.begin(), fuse_depths.end());
                fuse_cmd.cameras.assign(fuse_cameras.begin(), fuse_cameras.end());
                fuse_cmd.output = fuse_out;
                fuse_cmd.json = json;
                svol::cmd_fuse(fuse_cmd, out, err);
            } else if (*mesh) {
                mesh_cmd.tsdf = mesh_in;
                mesh_cmd.output = mesh_out;
                mesh_cmd.json = json;
                svol::cmd_mesh(mesh_cmd, out, err);
            } else if (*eval) {
                eval_cmd.pred = eval_pred;
                eval_cmd.gt = eval_gt;
                eval_cmd.json = json;
                svol::cmd_eval(eval_cmd, out, err);
            } else if (*bench) {
                bench_cmd.output = bench_out;
                svol::cmd_bench(bench_cmd, out, err);
            } else if (*inspect) {
                inspect_cmd.bundle = inspect_in;
                inspect_cmd.json = json;
                svol::cmd_inspect(inspect_cmd, out, err);
            } else if (*frags) {
                frag_cmd.config = o.resolve();
                svol::cmd_fragments(frag_cmd, out, err);
            } else if (*synth) {
                synth_cmd.output_dir = synth_out;
                svol::cmd_synth(synth_cmd, out, err);
            }
        },
        err);
}
