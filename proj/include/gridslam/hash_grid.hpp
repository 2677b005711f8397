#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gridslam/geometry.hpp"
#include "gridslam/rng.hpp"

namespace gridslam {

struct HashGridConfig {
    int levels = 16;
    int features_per_level = 2;
    int table_size_log2 = 19;
    int base_resolution = 16;
    double finest_voxel_size = 0.02;
};

// Multiresolution feature grid over an axis-aligned scene box. Coarse levels
// whose dense lattice fits in the table are indexed directly; finer levels
// fall back to spatial hashing. Query points outside the scene box are
// clamped (marginal rays at image edges can step slightly out).
class HashGrid {
public:
    HashGrid() = default;
    HashGrid(const HashGridConfig& cfg, const Aabb& scene_bounds);

    int levels() const { return levels_; }
    int features_per_level() const { return features_; }
    int feature_dim() const { return levels_ * features_; }
    int resolution(int level) const { return resolutions_[level]; }
    const Aabb& scene_bounds() const { return scene_bounds_; }
    size_t param_count() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    void init_features(Rng& rng, double scale = 1e-4);

    // Fills every level from a spatial function evaluated at the lattice
    // vertices. Only valid when all levels are densely indexed (a hashed
    // entry has no unique position); throws otherwise.
    void init_features_from(const std::function<double(const Vec3&, int, int)>& fn);

    // Concatenated per-level trilinear features. out must hold feature_dim().
    // Returns true when the point had to be clamped to the scene box.
    bool encode(const Vec3& point, double* out) const;

    // Reverse pass for one point: adds the chain of d_features (length
    // feature_dim()) into grad_params, and, when grad_point is non-null, adds
    // the spatial derivative d(loss)/d(point). Clamped axes propagate zero
    // spatial gradient.
    void encode_backward(const Vec3& point, const double* d_features,
                         std::span<double> grad_params, Vec3* grad_point) const;

    // Serialization helpers for the checkpoint writer.
    struct Layout {
        int levels, features, table_size_log2, base_resolution;
        double finest_voxel_size;
        Aabb scene_bounds;
    };
    Layout layout() const {
        return {levels_, features_, table_log2_, base_resolution_, finest_voxel_, scene_bounds_};
    }
    static HashGrid from_layout(const Layout& l);

private:
    struct Corner {
        size_t index; // param offset of the first feature channel
        double weight;
        Vec3 dweight; // d(weight)/d(point), meters^-1, zero on clamped axes
    };
    // Fills corners[8] for one level; shared by encode and encode_backward.
    void level_corners(int level, const Vec3& p, const bool clamped[3], Corner corners[8]) const;

    int levels_ = 0;
    int features_ = 0;
    int table_log2_ = 0;
    int base_resolution_ = 0;
    double finest_voxel_ = 0.0;
    size_t table_entries_ = 0;
    uint32_t table_mask_ = 0;
    Aabb scene_bounds_;
    Aabb grid_box_; // cube covering the scene box; keeps voxels cubic
    std::vector<int> resolutions_;
    std::vector<uint8_t> dense_;
    std::vector<size_t> level_offsets_; // param offset of each level's table
    std::vector<double> params_;
};

} // namespace gridslam
