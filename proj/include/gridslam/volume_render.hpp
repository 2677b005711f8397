#pragma once

#include <span>
#include <vector>

#include "gridslam/geometry.hpp"
#include "gridslam/scene_field.hpp"

namespace gridslam {

// Density from raw SDF: sigma = (1/alpha) * Sigmoid(-sdf / alpha).
double sdf_to_density(double sdf, double alpha);

// d(sigma)/d(sdf) and d(sigma)/d(alpha) for the conversion above.
void sdf_to_density_grad(double sdf, double alpha, double* d_sdf, double* d_alpha);

struct CompositeResult {
    std::vector<double> weights;      // w_i = T_i * (1 - exp(-sigma_i))
    Vec3 color = Vec3::Zero();        // sum w_i c_i
    double depth = 0.0;               // sum w_i d_i
    double termination = 0.0;         // p(r) = sum w_i
    double depth_uncertainty = 0.0;   // sqrt(sum w_i (depth - d_i)^2)
};

// Volume compositing over one ray. Densities are used as printed in the
// weight recurrence: no sample-spacing factor unless spacing_scaled is set,
// in which case sigma_i is scaled by the local sample spacing first.
CompositeResult composite(std::span<const double> sigma, std::span<const Vec3> colors,
                          std::span<const double> distances, bool spacing_scaled = false);

// Reverse pass of composite (unscaled variant): given dL/dw_i, accumulates
// dL/dsigma_i. O(N) via a suffix sum.
void composite_backward(std::span<const double> sigma, std::span<const double> d_weights,
                        std::span<double> d_sigma);

// Pixel-level predictive uncertainty (1 - p)^2.
double pixel_uncertainty(double termination);

// Image-level predictive uncertainty: mean of the per-pixel values. Throws
// on an empty list.
double image_uncertainty(std::span<const double> pixel_uncertainties);

// One fully evaluated ray against the field.
struct RayEval {
    std::vector<double> sdf;
    std::vector<Vec3> sample_colors;
    std::vector<double> sigma;
    CompositeResult comp;
    double beta = 1.0; // pixel uncertainty
    bool clamped = false;
};

RayEval evaluate_ray(const SceneField& field, const Vec3& origin, const Vec3& dir,
                     std::span<const double> distances, bool spacing_scaled = false);

// Depth-only variant (skips the appearance path).
double render_depth(const SceneField& field, const Vec3& origin, const Vec3& dir,
                    std::span<const double> distances);

} // namespace gridslam
