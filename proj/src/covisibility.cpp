#include "gridslam/covisibility.hpp"

#include <algorithm>

namespace gridslam {

double overlap_coefficient(const Pose& source_pose, const Image& source_depth,
                           const Pose& target_pose, const CameraIntrinsics& intrinsics,
                           const Aabb& bounds, const CovisibilityConfig& cfg, Rng& rng) {
    const Pose target_inv = target_pose.inverse();
    const int crop = intrinsics.edge_crop;
    const int u_lo = crop, u_hi = intrinsics.width - 1 - crop;
    const int v_lo = crop, v_hi = intrinsics.height - 1 - crop;

    int inside = 0, total = 0;
    for (int m = 0; m < cfg.pixels; ++m) {
        const int u = u_lo + rng.uniform_int(u_hi - u_lo + 1);
        const int v = v_lo + rng.uniform_int(v_hi - v_lo + 1);
        const Vec3 dir_cam = intrinsics.pixel_dir(u, v);
        const double dn = dir_cam.norm();
        const Ray ray{source_pose.translation, source_pose.rotate(dir_cam) / dn};

        const double sensor_z = source_depth.at(u, v);
        double lo, hi;
        if (sensor_z > 0.0) {
            const double d_ray = sensor_z * dn;
            lo = std::max(cfg.near_clamp, d_ray - cfg.truncation);
            hi = d_ray + cfg.truncation;
        } else {
            const auto nf = ray_near_far(ray, bounds, cfg.near_clamp);
            if (!nf) {
                total += cfg.samples_per_ray; // counted; nothing can land inside
                continue;
            }
            lo = nf->first;
            hi = nf->second;
        }
        for (int k = 0; k < cfg.samples_per_ray; ++k) {
            const double t = lo + (k + rng.uniform()) * (hi - lo) / cfg.samples_per_ray;
            const Vec3 p_world = ray.origin + t * ray.dir;
            const Vec3 p_cam = target_inv.apply(p_world);
            ++total;
            if (p_cam.z() <= 0.0) continue;
            const Vec3 uvz = intrinsics.project(p_cam);
            // Pixel-area bounds: projections onto boundary pixels count as
            // inside, so self-overlap is exactly 1 despite rounding.
            if (uvz.x() > u_lo - 0.5 && uvz.x() < u_hi + 0.5 && uvz.y() > v_lo - 0.5 &&
                uvz.y() < v_hi + 0.5)
                ++inside;
        }
    }
    return total > 0 ? double(inside) / double(total) : 0.0;
}

} // namespace gridslam
