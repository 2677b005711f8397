#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridslam/frame_sequence.hpp"
#include "gridslam/scene_field.hpp"
#include "gridslam/triangle_mesh.hpp"

namespace gridslam {

struct AteResult {
    double rmse_cm = 0.0;
    double mean_cm = 0.0;
};

// Absolute trajectory error after closed-form rigid alignment (similarity
// scale optional, off by default because RGB-D trajectories carry metric
// scale). Requires at least 3 poses per trajectory of equal length.
AteResult ate_rmse(std::span<const Pose> estimated, std::span<const Pose> ground_truth,
                   bool with_scale = false);

// Mean |rendered - sensor| depth over valid-depth pixels, in cm, rendering
// every `stride`-th frame at the given poses.
double depth_l1_cm(const SceneField& field, std::span<const Pose> poses, const FrameSequence& seq,
                   int stride, int n_stratified = 48, double near_clamp = 0.05);

struct MeshCompareResult {
    double accuracy_cm = 0.0;            // rec -> gt mean nearest-neighbor distance
    double completion_cm = 0.0;          // gt -> rec
    double comp_ratio_1cm_pct = 0.0;     // fraction of gt samples within 1 cm
    double comp_ratio_3cm_pct = 0.0;
    double comp_ratio_5cm_pct = 0.0;
};

// Area-weighted surface samples on both meshes, nearest-neighbor distances
// via a uniform spatial-bin index (brute force under 10k points).
MeshCompareResult mesh_accuracy_completion(const TriangleMesh& reconstructed,
                                           const TriangleMesh& ground_truth, int n_samples,
                                           uint64_t seed);

// Peak signal-to-noise ratio with peak 1.0; +inf for identical images.
double psnr_db(const Image& rendered, const Image& reference);

struct MetricReport {
    double ate_rmse_cm = 0.0;
    double ate_mean_cm = 0.0;
    double depth_l1_cm = 0.0;
    double acc_cm = 0.0;
    double comp_cm = 0.0;
    double comp_ratio_1cm_pct = 0.0;
    double comp_ratio_3cm_pct = 0.0;
    double comp_ratio_5cm_pct = 0.0;
    double psnr_db = 0.0;
    uint64_t seed = 0;
    std::string config_digest;

    std::string to_key_values() const;
    std::string to_csv_row() const; // header + one row
};

} // namespace gridslam
