#include "gridslam/ray_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gridslam {

std::optional<std::pair<double, double>> ray_near_far(const Ray& ray, const Aabb& bounds,
                                                      double near_clamp) {
    auto hit = intersect_aabb(ray.origin, ray.dir, bounds);
    if (!hit) return std::nullopt;
    const double near = std::max(hit->first, near_clamp);
    const double far = hit->second;
    if (far <= near) return std::nullopt;
    return std::make_pair(near, far);
}

std::vector<double> sample_ray_distances(double near, double far, double sensor_depth,
                                         const RaySamplingConfig& cfg, Rng& rng) {
    if (!(near < far)) throw std::runtime_error("ray sampling: near must be < far");
    std::vector<double> d;
    d.reserve(cfg.n_stratified + cfg.n_importance);
    const double step = (far - near) / cfg.n_stratified;
    for (int k = 0; k < cfg.n_stratified; ++k) d.push_back(near + (k + rng.uniform()) * step);
    if (sensor_depth > 0.0 && cfg.n_importance > 0) {
        const double lo = std::max(near, sensor_depth - cfg.truncation);
        const double hi = std::min(far, sensor_depth + cfg.truncation);
        if (lo < hi)
            for (int k = 0; k < cfg.n_importance; ++k) d.push_back(rng.uniform(lo, hi));
    }
    std::sort(d.begin(), d.end());
    for (size_t i = 1; i < d.size(); ++i)
        if (d[i] <= d[i - 1]) d[i] = std::nextafter(d[i - 1], far + 1.0);
    return d;
}

} // namespace gridslam
