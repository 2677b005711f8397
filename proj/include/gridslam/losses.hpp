#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridslam/camera.hpp"
#include "gridslam/run_config.hpp"
#include "gridslam/volume_render.hpp"

namespace gridslam {

// Binary confidence: 1 when the pixel uncertainty is at or below threshold.
inline bool confidence_mask(double beta_m, double threshold) { return beta_m <= threshold; }

enum class SampleClass : uint8_t { center, tail, free_space, unsupervised };

// Classification by the SDF target b = sensor_depth - d. Rays without valid
// depth have no target and all their samples are unsupervised.
SampleClass classify_sample(double b, double truncation);

// One supervised ray: the pixel, its sensor values, and the frozen sample
// distances. Distances are constants of the recorded pipeline; gradients
// flow through sample positions, not through the sampling itself.
struct RaySpec {
    int pose_index = 0;
    double u = 0.0, v = 0.0;
    Vec3 sensor_color = Vec3::Zero();
    double sensor_depth = 0.0; // 0 = invalid
    std::vector<double> distances;
};

// A recorded forward pass: everything the loss needs beyond the live
// parameters. Masks and normalizers are computed once per iteration and
// then held constant (no gradient flows through the confidence function).
struct BatchRecord {
    std::vector<RaySpec> rays;
    std::vector<uint8_t> cf; // per-ray confidence, frozen
    CameraIntrinsics intrinsics;
    OptimMode mode = OptimMode::mapping;
    LossWeights weights;
    double truncation = 0.06;
    bool spacing_scaled = false;
    int m_star_rgb = 0;   // unmasked rays
    int m_star_depth = 0; // unmasked rays with valid depth
};

struct MaskSummary {
    std::vector<double> betas;
    int m_star_rgb = 0;
    int m_star_depth = 0;
    int valid_depth_rays = 0;
    bool all_masked_rgb = false;
    bool all_masked_depth = false;
    double image_beta = 1.0;
};

// Renders every ray, derives per-ray uncertainties and confidence masks, and
// freezes masks + normalizers into the record. force_unmasked implements the
// all-masked fallback (and the reweighting-off ablation): every CF = 1.
MaskSummary compute_masks(const SceneField& field, std::span<const Pose> poses,
                          BatchRecord& record, double pixel_threshold, bool force_unmasked);

struct LossBreakdown {
    double rgb = 0.0;
    double depth = 0.0;
    double sdf_center = 0.0;
    double sdf_tail = 0.0;
    double free_space = 0.0;
    double total = 0.0;
};

// Per-ray pieces shared by the plain loss and the gradient pass.
struct RayLossTerms {
    double rgb = 0.0;         // squared L2 color residual over 3 channels
    double depth = 0.0;       // squared depth residual (valid depth only)
    double center = 0.0, tail = 0.0, fs = 0.0; // per-ray class means
    int n_center = 0, n_tail = 0, n_fs = 0;
    bool valid_depth = false;
};

RayLossTerms ray_loss_terms(const RaySpec& spec, const RayEval& eval, double truncation);

// Aggregates per-ray terms with the record's frozen masks and normalizers
// and applies the mode's weights. Throws (naming the term) on a non-finite
// component.
LossBreakdown aggregate_loss(const BatchRecord& record, std::span<const RayLossTerms> terms);

// Pure forward loss of a frozen record against the current parameters; the
// reference path the gradient engine is checked against.
LossBreakdown batch_loss(const SceneField& field, std::span<const Pose> poses,
                         const BatchRecord& record);

} // namespace gridslam
