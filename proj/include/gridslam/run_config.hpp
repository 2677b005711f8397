#pragma once

#include <cstdint>
#include <string>

#include "gridslam/geometry.hpp"

namespace gridslam {

enum class OptimMode { tracking, mapping };

struct LossWeights {
    double rgb = 5.0;
    double depth = 1.0;
    double sdf_center = 200.0;
    double sdf_tail = 50.0;
    double free_space = 10.0;
};

// Every tunable of the pipeline, keyed for the line-oriented config format.
// Defaults are the published default settings; the replica/scannet/tum
// sections carry the per-dataset deviations.
struct RunConfig {
    std::string dataset = "synthetic"; // synthetic | replica | scannet | tum
    uint64_t seed = 0;
    bool deterministic = true;
    Aabb scene_bounds{Vec3(-4, -4, -4), Vec3(4, 4, 4)};

    // Scene field.
    int geometry_levels = 16;
    int appearance_levels = 16;
    int features_per_level = 2;
    int table_size_log2 = 19;
    int base_resolution = 16;
    double finest_voxel_size = 0.02;
    int decoder_hidden = 32;
    double alpha_init = 0.1;

    // Learning rates.
    double lr_geometry_grid = 5e-2;
    double lr_appearance_grid = 5e-2;
    double lr_decoder = 5e-3;
    double lr_rotation = 1e-3;
    double lr_translation = 1e-3;
    double tracking_lr_decay = 1.0; // per-iteration factor, 1 = constant
    double ba_pose_lr_scale = 1.0;  // pose lr multiplier inside bundle adjustment
    bool ba_optimize_poses = true;  // jointly refine keyframe poses during mapping

    // Ray sampling.
    int n_stratified = 32;
    int n_importance = 10;
    double truncation = 0.06;
    bool spacing_scaled_density = false;

    // Uncertainty.
    double pixel_uncertainty_threshold = 1e-2; // per-pixel mask threshold
    double image_uncertainty_threshold = 1e-3; // extra-mapping trigger
    bool uncertainty_reweighting = true;

    // Co-visibility and loop closure.
    double covisibility_threshold = 0.95;
    int loop_min_frame_gap = 100;
    int covis_pixels = 50;
    int covis_samples = 8;

    // Optimization schedule.
    int tracking_rays = 2000;
    int tracking_iterations = 8;
    int mapping_rays = 4000;
    int mapping_iterations = 13;
    int first_frame_iterations = 200;
    int mapping_interval = 4; // constant global BA period
    int local_window = 20;    // local BA keyframe window
    int edge_crop = 0;

    LossWeights tracking_weights{5.0, 1.0, 200.0, 50.0, 10.0};
    LossWeights mapping_weights{5.0, 0.1, 200.0, 10.0, 5.0};

    double mesh_resolution = 0.01;

    const LossWeights& weights(OptimMode mode) const {
        return mode == OptimMode::tracking ? tracking_weights : mapping_weights;
    }
};

// Parses the key = value / [section] format. Unknown keys and out-of-range
// values throw std::runtime_error naming the offender. Explicit keys always
// win over the built-in per-dataset overrides, so serialize/parse round-trips.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

} // namespace gridslam
