#pragma once

#include <optional>
#include <vector>

#include "gridslam/camera.hpp"
#include "gridslam/rng.hpp"

namespace gridslam {

struct RaySamplingConfig {
    int n_stratified = 32;
    int n_importance = 10;
    double truncation = 0.06;
    double near_clamp = 0.05;
};

// [near, far] from the ray/scene-box slab intersection with near clamped to
// near_clamp. Empty when the ray misses the box (callers skip such rays).
std::optional<std::pair<double, double>> ray_near_far(const Ray& ray, const Aabb& bounds,
                                                      double near_clamp = 0.05);

// Stratified samples over [near, far] (one uniform draw per equal
// sub-interval) plus, when the sensor depth is valid (> 0), uniform samples
// inside the truncation band around it. Merged, ascending, strictly
// increasing. sensor_depth = 0 means invalid.
std::vector<double> sample_ray_distances(double near, double far, double sensor_depth,
                                         const RaySamplingConfig& cfg, Rng& rng);

} // namespace gridslam
