#pragma once

// Small recorded-pipeline fixture shared by the gradient tests.

#include "gridslam/fd_check.hpp"
#include "gridslam/ray_sampling.hpp"

namespace fixture {

using namespace gridslam;

struct Pipeline {
    RunConfig cfg;
    SceneField field;
    std::vector<Pose> poses;
    BatchRecord record;
};

// Low-frequency sinusoidal lattice features. Central differences on the
// rendered loss stay clean because the trilinear slope jumps across cell
// boundaries scale with the (tiny) curvature of the underlying function;
// white-noise features would make position-dependent FD checks unusable at
// h = 1e-4.
inline void smooth_features(HashGrid& grid, double amplitude, uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec3> freq(size_t(grid.levels()) * grid.features_per_level());
    std::vector<double> phase(freq.size());
    for (size_t i = 0; i < freq.size(); ++i) {
        freq[i] = Vec3(rng.uniform(0.5, 2.2), rng.uniform(0.5, 2.2), rng.uniform(0.5, 2.2));
        phase[i] = rng.uniform(0.0, 2.0 * M_PI);
    }
    const int F = grid.features_per_level();
    grid.init_features_from([&, F](const Vec3& p, int level, int channel) {
        const size_t i = size_t(level) * F + channel;
        return amplitude * std::sin(freq[i].dot(p) + phase[i]);
    });
}

// A lightly structured field plus a handful of rays with valid depth. The
// sensor depths sit inside the sampled interval so every loss term is
// exercised. dense_smooth selects smooth features on dense tables (FD
// friendly); otherwise the finer levels hash and features are white noise.
inline Pipeline make_pipeline(uint64_t seed, int n_rays, OptimMode mode, int n_str = 8,
                              int n_imp = 4, bool dense_smooth = true) {
    Pipeline p;
    p.cfg.scene_bounds = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    p.cfg.geometry_levels = 4;
    p.cfg.appearance_levels = 4;
    p.cfg.table_size_log2 = dense_smooth ? 14 : 10;
    p.cfg.base_resolution = 4;
    p.cfg.finest_voxel_size = 0.1;
    p.cfg.decoder_hidden = 16;

    Rng rng(seed);
    p.field = SceneField::init(p.cfg, p.cfg.scene_bounds, rng);
    if (dense_smooth) {
        smooth_features(p.field.geometry_grid(), 0.06, rng.next_u64());
        smooth_features(p.field.appearance_grid(), 0.06, rng.next_u64());
    } else {
        for (double& w : p.field.geometry_grid().params()) w = rng.uniform(-0.05, 0.05);
        for (double& w : p.field.appearance_grid().params()) w = rng.uniform(-0.05, 0.05);
    }

    p.poses.resize(1);
    p.poses[0].translation = Vec3(0.05, -0.04, -0.62);
    p.poses[0].rotation = exp_quat(Vec3(0.02, -0.03, 0.01));

    p.record.intrinsics = CameraIntrinsics{40.0, 40.0, 15.5, 11.5, 32, 24, 0};
    p.record.mode = mode;
    p.record.weights = mode == OptimMode::tracking ? p.cfg.tracking_weights : p.cfg.mapping_weights;
    p.record.truncation = p.cfg.truncation;
    RaySamplingConfig scfg{n_str, n_imp, p.cfg.truncation, 0.05};
    for (int m = 0; m < n_rays; ++m) {
        RaySpec spec;
        spec.pose_index = 0;
        spec.u = 3 + rng.uniform_int(26);
        spec.v = 3 + rng.uniform_int(18);
        spec.sensor_color = Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
        spec.sensor_depth = rng.uniform(0.9, 1.4);
        spec.distances = sample_ray_distances(0.3, 1.6, spec.sensor_depth, scfg, rng);
        p.record.rays.push_back(std::move(spec));
    }
    compute_masks(p.field, p.poses, p.record, 1.0, true);
    return p;
}

} // namespace fixture
