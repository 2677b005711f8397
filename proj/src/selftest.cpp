#include "gridslam/selftest.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gridslam/adam.hpp"
#include "gridslam/dataset_io.hpp"
#include "gridslam/fd_check.hpp"
#include "gridslam/marching_cubes.hpp"
#include "gridslam/metrics.hpp"
#include "gridslam/ray_sampling.hpp"
#include "gridslam/schedule.hpp"
#include "gridslam/synthetic.hpp"
#include "gridslam/volume_render.hpp"

namespace gridslam {
namespace {

SelftestResult weight_sum_identity(Rng& rng) {
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + rng.uniform_int(128);
        std::vector<double> sigma(n);
        double sum_sigma = 0.0;
        for (double& s : sigma) {
            s = rng.uniform(0.0, 3.0);
            sum_sigma += s;
        }
        std::vector<double> dist(n);
        for (int i = 0; i < n; ++i) dist[i] = 0.1 * (i + 1);
        const CompositeResult r = composite(sigma, {}, dist);
        worst = std::max(worst, std::abs(r.termination - (1.0 - std::exp(-sum_sigma))));
    }
    std::ostringstream d;
    d << "max |sum(w) - (1 - exp(-sum(sigma)))| = " << worst;
    return {"weight_sum_identity", worst < 1e-12, d.str()};
}

SelftestResult uncertainty_bounds(Rng& rng) {
    bool ok = true;
    double prev_beta = 1.0, prev_p = -1.0;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const int n = 1 + rng.uniform_int(128);
        std::vector<double> sigma(n), dist(n);
        for (int i = 0; i < n; ++i) {
            sigma[i] = rng.uniform(0.0, 2.0);
            dist[i] = 0.05 * (i + 1);
        }
        const CompositeResult r = composite(sigma, {}, dist);
        const double beta = pixel_uncertainty(r.termination);
        ok = ok && r.termination >= 0.0 && r.termination < 1.0 && beta >= 0.0 && beta <= 1.0;
        if (r.termination > prev_p && beta > prev_beta + 1e-15) ok = false;
        prev_p = r.termination;
        prev_beta = beta;
    }
    // Strict monotone decrease of beta in p on a sweep.
    for (double p = 0.0; p < 0.999 && ok; p += 0.01)
        if (pixel_uncertainty(p + 0.01) >= pixel_uncertainty(p)) ok = false;
    return {"uncertainty_bounds", ok, "p in [0,1), beta=(1-p)^2 in [0,1], decreasing"};
}

SelftestResult composite_values() {
    bool ok = true;
    std::ostringstream d;
    {
        const std::vector<double> sigma{std::log(2.0)};
        const std::vector<double> dist{1.0};
        const CompositeResult r = composite(sigma, {}, dist);
        ok = ok && std::abs(r.weights[0] - 0.5) < 1e-12 && std::abs(r.termination - 0.5) < 1e-12;
    }
    {
        const std::vector<double> sigma{std::log(2.0), std::log(2.0)};
        const std::vector<double> dist{1.0, 2.0};
        const CompositeResult r = composite(sigma, {}, dist);
        ok = ok && std::abs(r.weights[0] - 0.5) < 1e-12 && std::abs(r.weights[1] - 0.25) < 1e-12 &&
             std::abs(r.termination - 0.75) < 1e-12;
    }
    ok = ok && std::abs(sdf_to_density(0.0, 1.0) - 0.5) < 1e-15;
    ok = ok && std::abs(sdf_to_density(-1.0, 0.5) - 2.0 / (1.0 + std::exp(-2.0))) < 1e-12;
    return {"composite_values", ok, "hand-evaluated weight/termination/density cases"};
}

SelftestResult adam_behavior() {
    bool ok = true;
    // Zero gradient leaves values fixed.
    std::vector<double> v{1.0, -2.0};
    std::vector<double> g{0.0, 0.0};
    AdamState st;
    adam_step(v, g, st, 1e-3);
    ok = ok && v[0] == 1.0 && v[1] == -2.0;
    // Unit gradient at t=1 moves by lr/(1+eps).
    std::vector<double> v2{0.0};
    std::vector<double> g2{1.0};
    AdamState st2;
    adam_step(v2, g2, st2, 1e-3);
    ok = ok && std::abs(v2[0] + 1e-3 / (1.0 + 1e-8)) < 1e-18;
    // Determinism.
    std::vector<double> a{0.3}, b{0.3}, gr{0.7};
    AdamState sa, sb;
    for (int i = 0; i < 5; ++i) adam_step(a, gr, sa, 1e-2);
    for (int i = 0; i < 5; ++i) adam_step(b, gr, sb, 1e-2);
    ok = ok && a[0] == b[0];
    return {"adam_behavior", ok, "zero-grad fixpoint, t=1 magnitude, bitwise determinism"};
}

SelftestResult gradient_spot_check(Rng& rng) {
    RunConfig cfg;
    cfg.scene_bounds = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    cfg.geometry_levels = 4;
    cfg.appearance_levels = 4;
    cfg.table_size_log2 = 12;
    cfg.base_resolution = 4;
    cfg.finest_voxel_size = 0.15; // all levels dense at this table size
    cfg.decoder_hidden = 16;
    Rng init = rng.fork(1);
    SceneField field = SceneField::init(cfg, cfg.scene_bounds, init);
    // Smooth lattice features keep h = 1e-4 central differences clean of
    // the trilinear cell-boundary kinks.
    auto smooth = [&init](HashGrid& grid) {
        std::vector<Vec3> freq(size_t(grid.levels()) * grid.features_per_level());
        std::vector<double> phase(freq.size());
        for (size_t i = 0; i < freq.size(); ++i) {
            freq[i] = Vec3(init.uniform(0.5, 2.0), init.uniform(0.5, 2.0), init.uniform(0.5, 2.0));
            phase[i] = init.uniform(0.0, 2.0 * M_PI);
        }
        const int F = grid.features_per_level();
        grid.init_features_from([&freq, &phase, F](const Vec3& p, int level, int channel) {
            const size_t i = size_t(level) * F + channel;
            return 0.06 * std::sin(freq[i].dot(p) + phase[i]);
        });
    };
    smooth(field.geometry_grid());
    smooth(field.appearance_grid());

    std::vector<Pose> poses(1);
    poses[0].translation = Vec3(0, 0, -0.6);

    BatchRecord rec;
    rec.intrinsics = CameraIntrinsics{40.0, 40.0, 15.5, 11.5, 32, 24, 0};
    rec.mode = OptimMode::mapping;
    rec.weights = cfg.mapping_weights;
    rec.truncation = cfg.truncation;
    RaySamplingConfig scfg{8, 4, cfg.truncation, 0.05};
    for (int m = 0; m < 4; ++m) {
        RaySpec spec;
        spec.pose_index = 0;
        spec.u = 4 + init.uniform_int(24);
        spec.v = 4 + init.uniform_int(16);
        spec.sensor_color = Vec3(0.4, 0.5, 0.6);
        spec.sensor_depth = 1.1 + 0.1 * m;
        spec.distances = sample_ray_distances(0.3, 1.5, spec.sensor_depth, scfg, init);
        rec.rays.push_back(spec);
    }
    compute_masks(field, poses, rec, 1.0, true);

    const BlockSelection sel = BlockSelection::all(poses.size());
    const GradientReport rep = compute_gradients(field, poses, rec, sel);
    auto blocks = pipeline_fd_blocks(field, poses, rec, rep, sel, 24, rng);
    const auto loss_fn = [&]() { return batch_loss(field, poses, rec).total; };
    const auto results = finite_difference_check(loss_fn, blocks, 1e-4);
    double worst = 0.0;
    for (const auto& r : results) worst = std::max(worst, r.max_rel);
    std::ostringstream d;
    d << "max relative error vs central differences = " << worst;
    return {"gradient_spot_check", worst < 1e-4, d.str()};
}

SelftestResult scheduler_semantics() {
    RunConfig cfg;
    cfg.image_uncertainty_threshold = 1e-3;
    cfg.covisibility_threshold = 0.95;
    cfg.loop_min_frame_gap = 100;
    cfg.mapping_interval = 4;
    bool ok = true;
    {
        const std::pair<int, double> kf[] = {{0, 0.99}};
        const auto d = schedule(150, 2e-3, kf, cfg);
        ok = ok && d.extra == ExtraMapping::lba; // uncertainty wins over loop
    }
    {
        const std::pair<int, double> kf[] = {{0, 0.97}};
        const auto d = schedule(150, 5e-4, kf, cfg);
        ok = ok && d.extra == ExtraMapping::llco && d.loop_anchor == 0;
    }
    {
        const std::pair<int, double> kf[] = {{100, 0.99}};
        const auto d = schedule(150, 5e-4, kf, cfg); // 50-frame gap: too young
        ok = ok && d.extra == ExtraMapping::none;
    }
    {
        const auto d = schedule(8, 5e-4, {}, cfg);
        ok = ok && d.do_gba && d.extra == ExtraMapping::none;
    }
    return {"scheduler_semantics", ok, "priority, loop gap, modulo rule"};
}

SelftestResult ate_invariance(Rng& rng) {
    std::vector<Pose> gt(50), est(50);
    for (int i = 0; i < 50; ++i) {
        gt[i].translation = Vec3(rng.normal(), rng.normal(), rng.normal());
        gt[i].rotation = exp_quat(Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.1);
        est[i] = gt[i];
        est[i].translation += 0.01 * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    const AteResult base = ate_rmse(est, gt);
    Pose rigid;
    rigid.rotation = exp_quat(Vec3(0.3, -0.2, 0.5));
    rigid.translation = Vec3(4.0, -2.0, 1.0);
    std::vector<Pose> moved(50);
    for (int i = 0; i < 50; ++i) moved[i] = rigid.compose(est[i]);
    const AteResult shifted = ate_rmse(moved, gt);
    const double delta = std::abs(shifted.rmse_cm - base.rmse_cm);
    std::ostringstream d;
    d << "rigid-transform rmse delta = " << delta << " cm";
    return {"ate_invariance", delta < 1e-9, d.str()};
}

SelftestResult marching_cubes_oracles() {
    const Aabb box{Vec3(-0.8, -0.8, -0.8), Vec3(0.8, 0.8, 0.8)};
    const auto sphere = [](const Vec3& p) { return p.norm() - 0.5; };
    const TriangleMesh m = marching_cubes(sphere, box, 0.01);
    bool ok = !m.vertices.empty();
    double max_err = 0.0;
    for (const Vec3& v : m.vertices) max_err = std::max(max_err, std::abs(v.norm() - 0.5));
    ok = ok && max_err <= 0.01;

    const auto plane = [](const Vec3& p) { return p.y() - 0.123; };
    const TriangleMesh mp = marching_cubes(plane, box, 0.05);
    double plane_err = 0.0;
    for (const Vec3& v : mp.vertices) plane_err = std::max(plane_err, std::abs(v.y() - 0.123));
    ok = ok && !mp.vertices.empty() && plane_err < 1e-6;

    const auto empty_field = [](const Vec3&) { return 0.5; };
    ok = ok && marching_cubes(empty_field, box, 0.1).triangles.empty();
    std::ostringstream d;
    d << "sphere vertex radius err " << max_err << ", plane err " << plane_err;
    return {"marching_cubes_oracles", ok, d.str()};
}

SelftestResult loader_round_trip(Rng& rng) {
    namespace fs = std::filesystem;
    SyntheticScene scene = SyntheticScene::room_with_sphere();
    scene.frames = 2;
    scene.width = 24;
    scene.height = 18;
    const fs::path dir =
        fs::temp_directory_path() / ("gridslam_selftest_" + std::to_string(rng.next_u64() % 100000));
    const FrameSequence written = synth_generate(scene, dir.string());
    const FrameSequence loaded = load_replica(dir.string());
    bool ok = loaded.size() == written.size();
    for (size_t f = 0; ok && f < written.size(); ++f)
        ok = written.frames[f].depth.data == loaded.frames[f].depth.data;
    fs::remove_all(dir);
    return {"loader_round_trip", ok, "synthetic -> disk -> load depth bitwise equality"};
}

} // namespace

std::vector<SelftestResult> run_selftests(uint64_t seed) {
    Rng rng(seed);
    std::vector<SelftestResult> out;
    Rng r1 = rng.fork(1), r2 = rng.fork(2), r3 = rng.fork(3), r4 = rng.fork(4), r5 = rng.fork(5);
    out.push_back(weight_sum_identity(r1));
    out.push_back(uncertainty_bounds(r2));
    out.push_back(composite_values());
    out.push_back(adam_behavior());
    out.push_back(gradient_spot_check(r3));
    out.push_back(scheduler_semantics());
    out.push_back(ate_invariance(r4));
    out.push_back(marching_cubes_oracles());
    out.push_back(loader_round_trip(r5));
    return out;
}

} // namespace gridslam
