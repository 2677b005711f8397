#include "gridslam/hash_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace gridslam {
namespace {

constexpr uint64_t kPrimes[3] = {1ull, 2654435761ull, 805459861ull};

} // namespace

HashGrid::HashGrid(const HashGridConfig& cfg, const Aabb& scene_bounds) {
    if (scene_bounds.volume() <= 0.0) throw std::runtime_error("hash grid: degenerate scene bounds");
    levels_ = cfg.levels;
    features_ = cfg.features_per_level;
    table_log2_ = cfg.table_size_log2;
    base_resolution_ = cfg.base_resolution;
    finest_voxel_ = cfg.finest_voxel_size;
    table_entries_ = size_t(1) << table_log2_;
    table_mask_ = static_cast<uint32_t>(table_entries_ - 1);
    scene_bounds_ = scene_bounds;
    grid_box_ = scene_bounds.bounding_cube();

    const double side = grid_box_.extent().x();
    const int finest = std::max(base_resolution_,
                                static_cast<int>(std::lround(side / finest_voxel_)));
    resolutions_.resize(levels_);
    if (levels_ == 1) {
        resolutions_[0] = finest;
    } else {
        const double growth = std::exp((std::log(double(finest)) - std::log(double(base_resolution_))) /
                                       double(levels_ - 1));
        for (int l = 0; l < levels_; ++l) {
            int r = static_cast<int>(std::floor(base_resolution_ * std::pow(growth, l) + 0.5));
            if (l > 0) r = std::max(r, resolutions_[l - 1] + 1);
            resolutions_[l] = r;
        }
        resolutions_[levels_ - 1] = std::max(resolutions_[levels_ - 1], finest);
    }

    dense_.resize(levels_);
    level_offsets_.resize(levels_);
    size_t total = 0;
    for (int l = 0; l < levels_; ++l) {
        const size_t verts = size_t(resolutions_[l] + 1);
        const size_t dense_count = verts * verts * verts;
        dense_[l] = dense_count <= table_entries_ ? 1 : 0;
        level_offsets_[l] = total;
        total += (dense_[l] ? dense_count : table_entries_) * features_;
    }
    params_.assign(total, 0.0);
}

HashGrid HashGrid::from_layout(const Layout& l) {
    HashGridConfig cfg{l.levels, l.features, l.table_size_log2, l.base_resolution,
                       l.finest_voxel_size};
    return HashGrid(cfg, l.scene_bounds);
}

void HashGrid::init_features(Rng& rng, double scale) {
    for (double& p : params_) p = rng.uniform(-scale, scale);
}

void HashGrid::init_features_from(const std::function<double(const Vec3&, int, int)>& fn) {
    const double side = grid_box_.extent().x();
    for (int l = 0; l < levels_; ++l) {
        if (!dense_[l])
            throw std::runtime_error("hash grid: init_features_from needs dense levels");
        const int res = resolutions_[l];
        const size_t stride = size_t(res + 1);
        double* level = params_.data() + level_offsets_[l];
        for (int z = 0; z <= res; ++z)
            for (int y = 0; y <= res; ++y)
                for (int x = 0; x <= res; ++x) {
                    const Vec3 p = grid_box_.min + (side / res) * Vec3(x, y, z);
                    double* feat = level + (x + y * stride + z * stride * stride) * features_;
                    for (int f = 0; f < features_; ++f) feat[f] = fn(p, l, f);
                }
    }
}

void HashGrid::level_corners(int level, const Vec3& p, const bool clamped[3], Corner corners[8]) const {
    const int res = resolutions_[level];
    const Vec3 rel = (p - grid_box_.min) / grid_box_.extent().x();
    int cell[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double scaled = rel[a] * res;
        int c = static_cast<int>(std::floor(scaled));
        if (c < 0) c = 0;
        if (c > res - 1) c = res - 1;
        cell[a] = c;
        frac[a] = scaled - c;
        if (frac[a] < 0.0) frac[a] = 0.0;
        if (frac[a] > 1.0) frac[a] = 1.0;
    }
    const double inv_cell = res / grid_box_.extent().x();
    const size_t stride = size_t(res + 1);
    const size_t base = level_offsets_[level];
    for (int corner = 0; corner < 8; ++corner) {
        uint64_t vx[3];
        double w = 1.0;
        Vec3 dw;
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            vx[a] = uint64_t(cell[a] + bit);
            const double wa = bit ? frac[a] : 1.0 - frac[a];
            const double da = bit ? 1.0 : -1.0;
            dw[a] = da;
            w *= wa;
        }
        // dweight along axis a = d_a * product of the other two axis factors.
        for (int a = 0; a < 3; ++a) {
            double prod = dw[a];
            for (int b = 0; b < 3; ++b) {
                if (b == a) continue;
                const int bit = (corner >> b) & 1;
                prod *= bit ? frac[b] : 1.0 - frac[b];
            }
            dw[a] = clamped[a] ? 0.0 : prod * inv_cell;
        }
        size_t entry;
        if (dense_[level]) {
            entry = vx[0] + vx[1] * stride + vx[2] * stride * stride;
        } else {
            entry = (vx[0] * kPrimes[0] ^ vx[1] * kPrimes[1] ^ vx[2] * kPrimes[2]) & table_mask_;
        }
        corners[corner] = Corner{base + entry * features_, w, dw};
    }
}

bool HashGrid::encode(const Vec3& point, double* out) const {
    bool clamped_axes[3];
    Vec3 p = point;
    bool any = false;
    for (int a = 0; a < 3; ++a) {
        clamped_axes[a] = p[a] < scene_bounds_.min[a] || p[a] > scene_bounds_.max[a];
        any |= clamped_axes[a];
        p[a] = std::min(std::max(p[a], scene_bounds_.min[a]), scene_bounds_.max[a]);
    }
    Corner corners[8];
    for (int l = 0; l < levels_; ++l) {
        level_corners(l, p, clamped_axes, corners);
        double* dst = out + size_t(l) * features_;
        for (int f = 0; f < features_; ++f) dst[f] = 0.0;
        for (const Corner& c : corners) {
            const double* src = params_.data() + c.index;
            for (int f = 0; f < features_; ++f) dst[f] += c.weight * src[f];
        }
    }
    return any;
}

void HashGrid::encode_backward(const Vec3& point, const double* d_features,
                               std::span<double> grad_params, Vec3* grad_point) const {
    bool clamped_axes[3];
    Vec3 p = point;
    for (int a = 0; a < 3; ++a) {
        clamped_axes[a] = point[a] < scene_bounds_.min[a] || point[a] > scene_bounds_.max[a];
        p[a] = std::min(std::max(p[a], scene_bounds_.min[a]), scene_bounds_.max[a]);
    }
    Corner corners[8];
    for (int l = 0; l < levels_; ++l) {
        level_corners(l, p, clamped_axes, corners);
        const double* up = d_features + size_t(l) * features_;
        for (const Corner& c : corners) {
            const double* feat = params_.data() + c.index;
            double dot = 0.0;
            for (int f = 0; f < features_; ++f) {
                if (!grad_params.empty()) grad_params[c.index + f] += c.weight * up[f];
                dot += up[f] * feat[f];
            }
            if (grad_point) *grad_point += dot * c.dweight;
        }
    }
}

} // namespace gridslam
