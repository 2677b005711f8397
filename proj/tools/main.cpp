#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gridslam/dataset_io.hpp"
#include "gridslam/marching_cubes.hpp"
#include "gridslam/mesh_culling.hpp"
#include "gridslam/metrics.hpp"
#include "gridslam/ray_sampling.hpp"
#include "gridslam/selftest.hpp"
#include "gridslam/slam_system.hpp"
#include "gridslam/synthetic.hpp"
#include "../src/image_io.hpp"

namespace fs = std::filesystem;
using namespace gridslam;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void require_exists(const std::string& path) {
    if (!fs::exists(path)) throw CLI::ValidationError("path does not exist: " + path);
}

FrameSequence load_dataset(const std::string& dir) {
    if (fs::exists(fs::path(dir) / "rgb.txt")) return load_tum(dir);
    if (fs::exists(fs::path(dir) / "traj.txt")) return load_replica(dir);
    throw std::runtime_error("dataset: neither TUM (rgb.txt) nor Replica (traj.txt) layout in " +
                             dir);
}

int cmd_synth(const std::string& spec, const std::string& out) {
    const SyntheticScene scene = SyntheticScene::from_json_file(spec);
    const FrameSequence seq = synth_generate(scene, out);
    std::printf("wrote %zu frames (%dx%d) to %s\n", seq.size(), seq.intrinsics.width,
                seq.intrinsics.height, out.c_str());
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& dataset, const std::string& out,
            bool diagnostics, bool eval) {
    RunConfig cfg = load_config(config_path);
    const FrameSequence seq = load_dataset(dataset);
    SlamSystem slam(cfg, seq);
    slam.run();
    slam.write_outputs(out, diagnostics);
    for (const std::string& e : slam.events()) std::fprintf(stderr, "[event] %s\n", e.c_str());

    MetricReport report;
    report.seed = cfg.seed;
    if (seq.has_gt_trajectory()) {
        std::vector<Pose> gt;
        for (const Frame& f : seq.frames) gt.push_back(f.gt_pose);
        const AteResult ate = ate_rmse(slam.poses(), gt);
        report.ate_rmse_cm = ate.rmse_cm;
        report.ate_mean_cm = ate.mean_cm;
        std::printf("ATE RMSE %.4f cm (mean %.4f cm)\n", ate.rmse_cm, ate.mean_cm);
    }
    if (eval) {
        report.depth_l1_cm = depth_l1_cm(slam.field(), slam.poses(), seq, 5, cfg.n_stratified);
        std::printf("depth L1 %.4f cm\n", report.depth_l1_cm);
    }
    std::ofstream(fs::path(out) / "report.txt") << report.to_key_values();
    std::ofstream(fs::path(out) / "report.csv") << report.to_csv_row();
    std::printf("outputs written to %s\n", out.c_str());
    return kExitOk;
}

int cmd_eval_traj(const std::string& est_path, const std::string& gt_path) {
    const auto est = load_tum_trajectory(est_path);
    const auto gt = load_tum_trajectory(gt_path);
    std::vector<Pose> est_poses, gt_poses;
    for (const auto& [ts, p] : est) est_poses.push_back(p);
    for (const auto& [ts, p] : gt) gt_poses.push_back(p);
    const AteResult ate = ate_rmse(est_poses, gt_poses);
    std::printf("ate_rmse_cm = %.6f\nate_mean_cm = %.6f\n", ate.rmse_cm, ate.mean_cm);
    return kExitOk;
}

int cmd_eval_mesh(const std::string& rec_path, const std::string& gt_path, int samples,
                  uint64_t seed) {
    const TriangleMesh rec = load_ply(rec_path);
    const TriangleMesh gt = load_ply(gt_path);
    const MeshCompareResult r = mesh_accuracy_completion(rec, gt, samples, seed);
    std::printf("acc_cm = %.6f\ncomp_cm = %.6f\n", r.accuracy_cm, r.completion_cm);
    std::printf("comp_ratio_1cm_pct = %.4f\ncomp_ratio_3cm_pct = %.4f\ncomp_ratio_5cm_pct = %.4f\n",
                r.comp_ratio_1cm_pct, r.comp_ratio_3cm_pct, r.comp_ratio_5cm_pct);
    return kExitOk;
}

int cmd_mesh(const std::string& checkpoint, const std::string& out_ply, double res,
             const std::string& cull_traj, const std::string& camera_file) {
    const SceneField field = SceneField::load(checkpoint);
    TriangleMesh mesh = extract_mesh(field, field.scene_bounds(), res);
    if (!cull_traj.empty()) {
        const auto traj = load_tum_trajectory(cull_traj);
        std::vector<Pose> poses;
        for (const auto& [ts, p] : traj) poses.push_back(p);
        const CameraIntrinsics intr = load_intrinsics(camera_file);
        mesh = cull_mesh(mesh, poses, intr);
    }
    save_ply(mesh, out_ply);
    std::printf("mesh: %zu vertices, %zu triangles -> %s\n", mesh.vertices.size(),
                mesh.triangles.size(), out_ply.c_str());
    return kExitOk;
}

int cmd_render(const std::string& checkpoint, const std::string& pose_file,
               const std::string& out_dir, const std::string& camera_file, int n_samples) {
    const SceneField field = SceneField::load(checkpoint);
    const CameraIntrinsics intr = load_intrinsics(camera_file);
    const auto traj = load_tum_trajectory(pose_file);
    fs::create_directories(out_dir);
    for (size_t i = 0; i < traj.size(); ++i) {
        const Pose& pose = traj[i].second;
        Image rgb = Image::create(intr.width, intr.height, 3);
        Image depth = Image::create(intr.width, intr.height, 1);
        Image unc = Image::create(intr.width, intr.height, 1);
        for (int y = 0; y < intr.height; ++y)
            for (int x = 0; x < intr.width; ++x) {
                const Vec3 dir_cam = intr.pixel_dir(x, y);
                const double dn = dir_cam.norm();
                const Ray ray{pose.translation, pose.rotate(dir_cam) / dn};
                const auto nf = ray_near_far(ray, field.scene_bounds(), 0.05);
                if (!nf) {
                    unc.at(x, y) = 1.0;
                    continue;
                }
                std::vector<double> dist(n_samples);
                const double step = (nf->second - nf->first) / n_samples;
                for (int k = 0; k < n_samples; ++k) dist[k] = nf->first + (k + 0.5) * step;
                const RayEval e = evaluate_ray(field, ray.origin, ray.dir, dist);
                rgb.at(x, y, 0) = e.comp.color.x();
                rgb.at(x, y, 1) = e.comp.color.y();
                rgb.at(x, y, 2) = e.comp.color.z();
                depth.at(x, y) = e.comp.depth / dn;
                unc.at(x, y) = e.beta;
            }
        char name[64];
        std::snprintf(name, sizeof(name), "rgb_%06zu.png", i);
        detail::write_color_png(rgb, (fs::path(out_dir) / name).string());
        std::snprintf(name, sizeof(name), "depth_%06zu.png", i);
        detail::write_depth_png(depth, (fs::path(out_dir) / name).string(), kReplicaDepthScale);
        std::snprintf(name, sizeof(name), "uncertainty_%06zu.png", i);
        detail::write_gray_png(unc, (fs::path(out_dir) / name).string());
    }
    std::printf("rendered %zu poses to %s\n", traj.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_selftest(uint64_t seed) {
    const auto results = run_selftests(seed);
    bool all = true;
    std::printf("%-26s %-6s %s\n", "suite", "result", "detail");
    for (const auto& r : results) {
        std::printf("%-26s %-6s %s\n", r.name.c_str(), r.pass ? "pass" : "FAIL", r.detail.c_str());
        all = all && r.pass;
    }
    return all ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dense RGB-D SLAM on decoupled hash grids"};
    app.require_subcommand(1);

    std::string spec, out, config, dataset, est, gt, rec, checkpoint, ply, pose_file, camera_file,
        cull_traj;
    bool diagnostics = false, eval = false;
    double res = 0.01;
    int samples = 200000, render_samples = 64;
    uint64_t seed = 0;

    auto* synth = app.add_subcommand("synth", "generate an analytic synthetic dataset");
    synth->add_option("spec", spec, "scene spec (json)")->required()->check(CLI::ExistingFile);
    synth->add_option("out", out, "output dataset directory")->required();

    auto* run = app.add_subcommand("run", "run the SLAM loop on a dataset");
    run->add_option("config", config, "run config file")->required()->check(CLI::ExistingFile);
    run->add_option("dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
    run->add_option("out", out, "output directory")->required();
    run->add_flag("--diagnostics", diagnostics, "write per-frame uncertainty/velocity CSV");
    run->add_flag("--eval", eval, "also render depth maps and report depth L1");

    auto* evtraj = app.add_subcommand("eval-traj", "absolute trajectory error");
    evtraj->add_option("estimated", est, "estimated trajectory (TUM format)")->required()->check(CLI::ExistingFile);
    evtraj->add_option("groundtruth", gt, "ground-truth trajectory (TUM format)")->required()->check(CLI::ExistingFile);

    auto* evmesh = app.add_subcommand("eval-mesh", "mesh accuracy/completion metrics");
    evmesh->add_option("reconstructed", rec, "reconstructed mesh (ply)")->required()->check(CLI::ExistingFile);
    evmesh->add_option("groundtruth", gt, "ground-truth mesh (ply)")->required()->check(CLI::ExistingFile);
    evmesh->add_option("--samples", samples, "surface samples per mesh");
    evmesh->add_option("--seed", seed, "sampling seed");

    auto* mesh = app.add_subcommand("mesh", "extract a mesh from a checkpoint");
    mesh->add_option("checkpoint", checkpoint, "field checkpoint")->required()->check(CLI::ExistingFile);
    mesh->add_option("out", ply, "output ply")->required();
    mesh->add_option("--res", res, "marching cubes cell size in meters");
    mesh->add_option("--cull-traj", cull_traj, "trajectory for frustum culling (TUM format)")->check(CLI::ExistingFile);
    mesh->add_option("--camera", camera_file, "intrinsics file for culling")->check(CLI::ExistingFile);

    auto* render = app.add_subcommand("render", "render RGB/depth/uncertainty images");
    render->add_option("checkpoint", checkpoint, "field checkpoint")->required()->check(CLI::ExistingFile);
    render->add_option("poses", pose_file, "trajectory (TUM format)")->required()->check(CLI::ExistingFile);
    render->add_option("out", out, "output directory")->required();
    render->add_option("--camera", camera_file, "intrinsics file")->required()->check(CLI::ExistingFile);
    render->add_option("--samples", render_samples, "samples per ray");

    auto* selftest = app.add_subcommand("selftest", "run the property suites");
    selftest->add_option("--seed", seed, "suite seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(spec, out);
        if (run->parsed()) return cmd_run(config, dataset, out, diagnostics, eval);
        if (evtraj->parsed()) return cmd_eval_traj(est, gt);
        if (evmesh->parsed()) return cmd_eval_mesh(rec, gt, samples, seed);
        if (mesh->parsed()) {
            if (!cull_traj.empty() && camera_file.empty())
                throw CLI::ValidationError("--cull-traj requires --camera");
            return cmd_mesh(checkpoint, ply, res, cull_traj, camera_file);
        }
        if (render->parsed()) return cmd_render(checkpoint, pose_file, out, camera_file, render_samples);
        if (selftest->parsed()) return cmd_selftest(seed);
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitValidation;
}
