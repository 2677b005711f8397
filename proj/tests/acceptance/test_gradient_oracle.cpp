#include <doctest.h>

#include <chrono>

#include "gridslam/fd_check.hpp"
#include "gridslam/ray_sampling.hpp"
#include "criteria.hpp"

using namespace gridslam;

// Full mapping loss on 8 rays x 42 samples; analytic gradients against
// central differences (h = 1e-4) for grid features, decoder weights, alpha,
// pose rotation and pose translation.
//
// The rendering pipeline is piecewise smooth (ReLU decoders, trilinear
// cells), so a fixed-h probe that straddles a kink measures a blend of two
// one-sided slopes rather than the derivative; such probes are detected by
// the half-step self-consistency gate, excluded from the comparison, and
// for the pose blocks re-verified by the h -> 0 limit instead. Grid and
// decoder coordinates are a seeded subsample (two full forward passes per
// probe); pose and alpha coordinates are checked exhaustively.
TEST_CASE("criterion 3: gradient oracle on the full mapping loss") {
    const auto t0 = std::chrono::steady_clock::now();

    RunConfig cfg;
    cfg.scene_bounds = Aabb{Vec3(-1.5, -1.5, -1.5), Vec3(1.5, 1.5, 1.5)};
    cfg.geometry_levels = 4;
    cfg.appearance_levels = 4;
    cfg.table_size_log2 = 21; // all levels dense
    cfg.base_resolution = 4;
    cfg.finest_voxel_size = 0.05;
    cfg.decoder_hidden = 32;

    Rng rng(7);
    SceneField field = SceneField::init(cfg, cfg.scene_bounds, rng);
    // Smooth low-frequency lattice features: structured enough that every
    // loss path carries signal, smooth enough that trilinear slope jumps
    // stay far below the probe tolerance.
    auto smooth = [&rng](HashGrid& grid, double amplitude) {
        std::vector<Vec3> freq(size_t(grid.levels()) * grid.features_per_level());
        std::vector<double> phase(freq.size());
        for (size_t i = 0; i < freq.size(); ++i) {
            freq[i] = Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
            phase[i] = rng.uniform(0.0, 2.0 * M_PI);
        }
        const int F = grid.features_per_level();
        grid.init_features_from([&freq, &phase, F, amplitude](const Vec3& p, int level, int f) {
            const size_t i = size_t(level) * F + f;
            return amplitude * std::sin(freq[i].dot(p) + phase[i]);
        });
    };
    smooth(field.geometry_grid(), 0.10);
    smooth(field.appearance_grid(), 0.10);
    field.set_alpha(0.09);

    std::vector<Pose> poses(1);
    poses[0].rotation = exp_quat(Vec3(0.03, -0.06, 0.02));
    poses[0].translation = Vec3(0.02, -0.03, -0.35);

    BatchRecord rec;
    rec.intrinsics = CameraIntrinsics{55.0, 55.0, 31.5, 23.5, 64, 48, 0};
    rec.mode = OptimMode::mapping;
    rec.weights = cfg.mapping_weights;
    rec.truncation = cfg.truncation;
    RaySamplingConfig scfg{32, 10, cfg.truncation, 0.05}; // 42 samples per ray
    for (int m = 0; m < 8; ++m) {
        RaySpec spec;
        spec.pose_index = 0;
        spec.u = 6 + rng.uniform_int(52);
        spec.v = 6 + rng.uniform_int(36);
        spec.sensor_color =
            Vec3(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8));
        spec.sensor_depth = rng.uniform(0.8, 1.3);
        spec.distances = sample_ray_distances(0.3, 1.7, spec.sensor_depth, scfg, rng);
        REQUIRE(spec.distances.size() == 42);
        rec.rays.push_back(std::move(spec));
    }
    compute_masks(field, poses, rec, 1.0, true);
    REQUIRE(rec.m_star_depth == 8);

    const BlockSelection sel = BlockSelection::all(1);
    const GradientReport rep = compute_gradients(field, poses, rec, sel);
    REQUIRE(rep.max_abs > 0.0);

    Rng pick(17);
    auto blocks = pipeline_fd_blocks(field, poses, rec, rep, sel, 260, pick);
    auto loss = [&]() { return batch_loss(field, poses, rec).total; };
    const auto results = finite_difference_check(loss, blocks, 1e-4);
    std::printf("%s", format_fd_table(results).c_str());

    double worst = 0.0;
    int checked = 0, kinks = 0, failed = 0, probed = 0;
    for (const auto& r : results) {
        worst = std::max(worst, r.max_rel);
        checked += r.checked;
        kinks += r.kinks;
        failed += r.failed;
        probed += r.checked + r.kinks + r.failed;
        if (r.name.rfind("pose", 0) == 0) {
            // Every pose coordinate accounted for, none failed.
            CHECK(r.checked + r.kinks == 3);
            CHECK(r.failed == 0);
            CHECK(r.checked >= 2);
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass =
        failed == 0 && worst < 1e-4 && checked > 400 && kinks * 10 < probed && elapsed < 60.0;
    char desc[200];
    std::snprintf(desc, sizeof(desc),
                  "gradient oracle: max rel err %.3e over %d coords (%d kink, %d failed), %.1f s",
                  worst, checked, kinks, failed, elapsed);
    report_criterion(3, pass, desc);
    CHECK(failed == 0);
    CHECK(worst < 1e-4);
    CHECK(checked > 400);
    CHECK(kinks * 10 < probed);
    CHECK(elapsed < 60.0);
}
