// Copyright 2026 The svol Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svol/scene_config.hpp"

namespace svol {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2, // bad flags or config, missing input or upstream artifact
    kExitData = 3,   // input present but malformed or inconsistent
};

/// Runs `body`, mapping ConfigError to 2 and format/domain/budget errors to 3. Messages go to `err`.
int run_guarded(const std::function<void()>& body, std::ostream& err);

struct OccupancyCommand {
    SceneConfig config;
    std::filesystem::path output;
    bool probabilities = false; // input already holds probabilities rather than logits
    bool json = false;
};

struct BuildCommand {
    SceneConfig config;
    std::filesystem::path output;
    bool json = false;
};

struct RenderCommand {
    SceneConfig config;
    std::filesystem::path output_dir;
    std::vector<int> views; // empty: every camera
    bool virtual_views = true;
    bool json = false;
};

struct FuseCommand {
    SceneConfig config;
    std::vector<std::filesystem::path> manifests; // views.json files written by render or synth
    std::vector<std::filesystem::path> depths;    // paired with `cameras`
    std::vector<std::filesystem::path> cameras;
    bool virtual_only = false; // from manifests, fuse only the shifted views
    std::filesystem::path output;
    bool json = false;
};

struct MeshCommand {
    std::filesystem::path tsdf;
    std::filesystem::path output;
    double iso = 0.0;
    bool ascii = false;
    bool json = false;
};

struct EvalCommand {
    std::filesystem::path pred;
    std::filesystem::path gt;
    double density = 1.0; // extra surface samples per unit area for Chamfer
    double max_angle = 15.0;
    bool sign_agnostic = false;
    std::uint64_t seed = 0;
    bool json = false;
};

struct BenchCommand {
    std::vector<int> resolutions{32, 64, 128};
    double fraction = 0.0189;
    int supersample = 4;
    int channels = 32;
    int queries = 200000;
    int rays = 20000;
    std::uint64_t seed = 0;
    std::filesystem::path output; // CSV; empty writes to the output stream
};

struct InspectCommand {
    std::filesystem::path bundle;
    bool json = false;
};

struct FragmentsCommand {
    SceneConfig config;
    int view = 0;
    double x = 0.0;
    double y = 0.0;
};

struct SynthCommand {
    std::filesystem::path output_dir;
    int coarse_resolution = kDeskCoarseResolution;
    int supersample = 4;
    int image_channels = 4;
    int image_size = 64;
    int views = 8;
    int pos_enc_bands = 4;
    int tsdf_resolution = 128;
    std::uint64_t seed = 0;
};

void cmd_occupancy(const OccupancyCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_build(const BuildCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_render(const RenderCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_fuse(const FuseCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_mesh(const MeshCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_eval(const EvalCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_bench(const BenchCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_inspect(const InspectCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_fragments(const FragmentsCommand& cmd, std::ostream& out, std::ostream& err);
void cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err);

/// "Recall 96.8, Space Efficiency 1.89" (percentages).
std::string occupancy_report_line(double recall, double space_efficiency);

} // namespace svol
