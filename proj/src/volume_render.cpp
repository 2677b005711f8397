#include "gridslam/volume_render.hpp"

#include <cmath>
#include <stdexcept>

namespace gridslam {

double sdf_to_density(double sdf, double alpha) {
    return (1.0 / alpha) / (1.0 + std::exp(sdf / alpha));
}

void sdf_to_density_grad(double sdf, double alpha, double* d_sdf, double* d_alpha) {
    const double s = 1.0 / (1.0 + std::exp(sdf / alpha));
    const double sp = s * (1.0 - s);
    if (d_sdf) *d_sdf = -sp / (alpha * alpha);
    if (d_alpha) *d_alpha = (-s + sp * sdf / alpha) / (alpha * alpha);
}

namespace {

// Sample spacing used by the optional scaled variant: forward differences,
// last sample reuses the previous spacing.
double spacing_at(std::span<const double> distances, size_t i) {
    const size_t n = distances.size();
    if (n <= 1) return 1.0;
    return i + 1 < n ? distances[i + 1] - distances[i] : distances[n - 1] - distances[n - 2];
}

} // namespace

CompositeResult composite(std::span<const double> sigma, std::span<const Vec3> colors,
                          std::span<const double> distances, bool spacing_scaled) {
    const size_t n = sigma.size();
    CompositeResult r;
    r.weights.resize(n);
    double cum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double s = spacing_scaled ? sigma[i] * spacing_at(distances, i) : sigma[i];
        const double w = std::exp(-cum) * (1.0 - std::exp(-s));
        r.weights[i] = w;
        cum += s;
        if (!colors.empty()) r.color += w * colors[i];
        r.depth += w * distances[i];
        r.termination += w;
    }
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double diff = r.depth - distances[i];
        var += r.weights[i] * diff * diff;
    }
    r.depth_uncertainty = std::sqrt(var);
    return r;
}

void composite_backward(std::span<const double> sigma, std::span<const double> d_weights,
                        std::span<double> d_sigma) {
    const size_t n = sigma.size();
    // w_i = exp(-cum_i) (1 - exp(-sigma_i));  dw_i/dsigma_j = -w_i for j < i,
    // dw_i/dsigma_i = exp(-cum_i) exp(-sigma_i).
    double suffix = 0.0; // sum_{j>i} dL/dw_j * w_j
    std::vector<double> w(n);
    double cum = 0.0;
    std::vector<double> trans(n);
    for (size_t i = 0; i < n; ++i) {
        trans[i] = std::exp(-cum);
        w[i] = trans[i] * (1.0 - std::exp(-sigma[i]));
        cum += sigma[i];
    }
    for (size_t ii = n; ii-- > 0;) {
        d_sigma[ii] += d_weights[ii] * trans[ii] * std::exp(-sigma[ii]) - suffix;
        suffix += d_weights[ii] * w[ii];
    }
}

double pixel_uncertainty(double termination) {
    const double q = 1.0 - termination;
    return q * q;
}

double image_uncertainty(std::span<const double> pixel_uncertainties) {
    if (pixel_uncertainties.empty())
        throw std::runtime_error("image uncertainty: empty pixel list");
    double sum = 0.0;
    for (const double b : pixel_uncertainties) sum += b;
    return sum / double(pixel_uncertainties.size());
}

RayEval evaluate_ray(const SceneField& field, const Vec3& origin, const Vec3& dir,
                     std::span<const double> distances, bool spacing_scaled) {
    const size_t n = distances.size();
    RayEval e;
    e.sdf.resize(n);
    e.sample_colors.resize(n);
    e.sigma.resize(n);

    const int geo_dim = field.geometry_grid().feature_dim();
    const int app_dim = field.appearance_grid().feature_dim();
    std::vector<double> geo_feat(geo_dim), app_feat(app_dim);
    Mlp::Workspace ws;
    for (size_t i = 0; i < n; ++i) {
        const Vec3 x = origin + distances[i] * dir;
        e.clamped |= field.geometry_grid().encode(x, geo_feat.data());
        double phi;
        field.geometry_decoder().forward(geo_feat.data(), &phi, ws);
        e.sdf[i] = phi;
        e.sigma[i] = sdf_to_density(phi, field.alpha());
        field.appearance_grid().encode(x, app_feat.data());
        double rgb[3];
        field.appearance_decoder().forward(app_feat.data(), rgb, ws);
        e.sample_colors[i] = Vec3(rgb[0], rgb[1], rgb[2]);
    }
    e.comp = composite(e.sigma, e.sample_colors, distances, spacing_scaled);
    e.beta = pixel_uncertainty(e.comp.termination);
    return e;
}

double render_depth(const SceneField& field, const Vec3& origin, const Vec3& dir,
                    std::span<const double> distances) {
    const size_t n = distances.size();
    std::vector<double> sigma(n);
    std::vector<double> geo_feat(field.geometry_grid().feature_dim());
    Mlp::Workspace ws;
    for (size_t i = 0; i < n; ++i) {
        const Vec3 x = origin + distances[i] * dir;
        field.geometry_grid().encode(x, geo_feat.data());
        double phi;
        field.geometry_decoder().forward(geo_feat.data(), &phi, ws);
        sigma[i] = sdf_to_density(phi, field.alpha());
    }
    return composite(sigma, {}, distances, false).depth;
}

} // namespace gridslam
