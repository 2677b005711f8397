#pragma once

#include <string>

#include "gridslam/hash_grid.hpp"
#include "gridslam/mlp.hpp"
#include "gridslam/run_config.hpp"

namespace gridslam {

// Decoupled scene representation: geometry hash grid + SDF decoder and
// appearance hash grid + color decoder, sharing no parameters, plus the
// density sharpness alpha. Raw SDF values live in truncation-normalized
// units (metric SDF is roughly sdf * truncation).
class SceneField {
public:
    SceneField() = default;
    static SceneField init(const RunConfig& cfg, const Aabb& scene_bounds, Rng& rng);

    double query_sdf(const Vec3& p) const;
    Vec3 query_color(const Vec3& p) const;

    HashGrid& geometry_grid() { return geometry_grid_; }
    const HashGrid& geometry_grid() const { return geometry_grid_; }
    HashGrid& appearance_grid() { return appearance_grid_; }
    const HashGrid& appearance_grid() const { return appearance_grid_; }
    Mlp& geometry_decoder() { return geometry_decoder_; }
    const Mlp& geometry_decoder() const { return geometry_decoder_; }
    Mlp& appearance_decoder() { return appearance_decoder_; }
    const Mlp& appearance_decoder() const { return appearance_decoder_; }

    double alpha() const { return alpha_; }
    void set_alpha(double a);
    const Aabb& scene_bounds() const { return geometry_grid_.scene_bounds(); }

    // Versioned binary checkpoint; save/load round-trips bitwise.
    void save(const std::string& path) const;
    static SceneField load(const std::string& path);

    // Order-stable digest of every parameter block; used to assert that
    // tracking never touches the field.
    uint64_t param_digest() const;

private:
    HashGrid geometry_grid_;
    HashGrid appearance_grid_;
    Mlp geometry_decoder_;
    Mlp appearance_decoder_;
    double alpha_ = 0.1;
};

} // namespace gridslam
