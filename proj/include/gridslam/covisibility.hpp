#pragma once

#include "gridslam/frame_sequence.hpp"
#include "gridslam/ray_sampling.hpp"

namespace gridslam {

struct CovisibilityConfig {
    int pixels = 50;
    int samples_per_ray = 8;
    double truncation = 0.06;
    double near_clamp = 0.05;
};

// Overlap coefficient between a source view and a target view: spatial
// points are sampled along rays of the source frame (inside the truncation
// band when its depth is valid, stratified over the scene box otherwise) and
// projected into the target camera. Returns the fraction that lands inside
// the target's cropped image with positive depth; the denominator is the
// total number of sampled points.
double overlap_coefficient(const Pose& source_pose, const Image& source_depth,
                           const Pose& target_pose, const CameraIntrinsics& intrinsics,
                           const Aabb& bounds, const CovisibilityConfig& cfg, Rng& rng);

} // namespace gridslam
