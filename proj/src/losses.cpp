#include "gridslam/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "gridslam/parallel.hpp"

namespace gridslam {

SampleClass classify_sample(double b, double truncation) {
    const double ab = std::abs(b);
    if (ab <= 0.4 * truncation) return SampleClass::center;
    if (ab < truncation) return SampleClass::tail;
    return SampleClass::free_space;
}

RayLossTerms ray_loss_terms(const RaySpec& spec, const RayEval& eval, double truncation) {
    RayLossTerms t;
    const Vec3 resid = eval.comp.color - spec.sensor_color;
    t.rgb = resid.squaredNorm();
    t.valid_depth = spec.sensor_depth > 0.0;
    if (!t.valid_depth) return t;

    const double dr = eval.comp.depth - spec.sensor_depth;
    t.depth = dr * dr;
    double sum_c = 0.0, sum_t = 0.0, sum_f = 0.0;
    for (size_t i = 0; i < spec.distances.size(); ++i) {
        const double b = spec.sensor_depth - spec.distances[i];
        const double phi = eval.sdf[i];
        switch (classify_sample(b, truncation)) {
            case SampleClass::center: {
                const double r = phi * truncation - b;
                sum_c += r * r;
                ++t.n_center;
                break;
            }
            case SampleClass::tail: {
                const double r = phi * truncation - b;
                sum_t += r * r;
                ++t.n_tail;
                break;
            }
            case SampleClass::free_space: {
                const double r = phi - 1.0;
                sum_f += r * r;
                ++t.n_fs;
                break;
            }
            case SampleClass::unsupervised:
                break;
        }
    }
    if (t.n_center > 0) t.center = sum_c / t.n_center;
    if (t.n_tail > 0) t.tail = sum_t / t.n_tail;
    if (t.n_fs > 0) t.fs = sum_f / t.n_fs;
    return t;
}

MaskSummary compute_masks(const SceneField& field, std::span<const Pose> poses,
                          BatchRecord& record, double pixel_threshold, bool force_unmasked) {
    const size_t n = record.rays.size();
    MaskSummary s;
    s.betas.assign(n, 1.0);
    record.cf.assign(n, 0);
    parallel_for(n, [&](size_t i) {
        const RaySpec& spec = record.rays[i];
        const Ray ray = generate_ray(poses[spec.pose_index], record.intrinsics, spec.u, spec.v);
        const RayEval e =
            evaluate_ray(field, ray.origin, ray.dir, spec.distances, record.spacing_scaled);
        s.betas[i] = e.beta;
        record.cf[i] = (force_unmasked || confidence_mask(e.beta, pixel_threshold)) ? 1 : 0;
    });
    for (size_t i = 0; i < n; ++i) {
        const bool valid = record.rays[i].sensor_depth > 0.0;
        if (valid) ++s.valid_depth_rays;
        if (record.cf[i]) {
            ++s.m_star_rgb;
            if (valid) ++s.m_star_depth;
        }
    }
    s.all_masked_rgb = s.m_star_rgb == 0;
    s.all_masked_depth = s.valid_depth_rays > 0 && s.m_star_depth == 0;
    s.image_beta = image_uncertainty(s.betas);
    record.m_star_rgb = s.m_star_rgb;
    record.m_star_depth = s.m_star_depth;
    return s;
}

LossBreakdown aggregate_loss(const BatchRecord& record, std::span<const RayLossTerms> terms) {
    LossBreakdown out;
    const size_t n = terms.size();
    double rgb = 0.0, dep = 0.0, c = 0.0, t = 0.0, f = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const RayLossTerms& r = terms[i];
        const double cf = record.cf[i] ? 1.0 : 0.0;
        rgb += record.mode == OptimMode::mapping ? r.rgb : cf * r.rgb;
        if (r.valid_depth) {
            dep += cf * r.depth;
            c += cf * r.center;
            t += cf * r.tail;
            f += cf * r.fs;
        }
    }
    if (record.mode == OptimMode::mapping) {
        if (n > 0) out.rgb = rgb / double(n);
    } else if (record.m_star_rgb > 0) {
        out.rgb = rgb / double(record.m_star_rgb);
    }
    if (record.m_star_depth > 0) {
        out.depth = dep / double(record.m_star_depth);
        out.sdf_center = c / double(record.m_star_depth);
        out.sdf_tail = t / double(record.m_star_depth);
        out.free_space = f / double(record.m_star_depth);
    }
    const LossWeights& w = record.weights;
    out.total = w.rgb * out.rgb + w.depth * out.depth + w.sdf_center * out.sdf_center +
                w.sdf_tail * out.sdf_tail + w.free_space * out.free_space;

    const std::pair<const char*, double> named[] = {{"rgb", out.rgb},
                                                    {"depth", out.depth},
                                                    {"sdf_center", out.sdf_center},
                                                    {"sdf_tail", out.sdf_tail},
                                                    {"free_space", out.free_space},
                                                    {"total", out.total}};
    for (const auto& [name, value] : named)
        if (!std::isfinite(value))
            throw std::runtime_error(std::string("loss: non-finite term '") + name + "'");
    return out;
}

LossBreakdown batch_loss(const SceneField& field, std::span<const Pose> poses,
                         const BatchRecord& record) {
    const size_t n = record.rays.size();
    std::vector<RayLossTerms> terms(n);
    parallel_for(n, [&](size_t i) {
        const RaySpec& spec = record.rays[i];
        const Ray ray = generate_ray(poses[spec.pose_index], record.intrinsics, spec.u, spec.v);
        const RayEval e =
            evaluate_ray(field, ray.origin, ray.dir, spec.distances, record.spacing_scaled);
        terms[i] = ray_loss_terms(spec, e, record.truncation);
    });
    return aggregate_loss(record, terms);
}

} // namespace gridslam
