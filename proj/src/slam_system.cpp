#include "gridslam/slam_system.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "gridslam/dataset_io.hpp"
#include "gridslam/ray_sampling.hpp"

namespace gridslam {
namespace {

const char* reason_string(InsertReason r) {
    switch (r) {
        case InsertReason::first: return "first";
        case InsertReason::constant: return "constant";
        case InsertReason::local: return "local";
        case InsertReason::llco: return "llco";
    }
    return "?";
}

} // namespace

SlamSystem::SlamSystem(const RunConfig& cfg, const FrameSequence& seq)
    : cfg_(cfg), seq_(seq), rng_(cfg.seed) {
    if (seq_.frames.empty()) throw std::runtime_error("slam: empty sequence");
    CameraIntrinsics intr = seq_.intrinsics;
    if (cfg_.edge_crop >= std::min(intr.width, intr.height) / 2)
        throw std::runtime_error("slam: edge crop too large for the image size");
    Rng init_rng = rng_.fork(0x11);
    field_ = SceneField::init(cfg_, cfg_.scene_bounds, init_rng);
    frame_poses_.assign(seq_.frames.size(), Pose{});
}

std::vector<RaySpec> SlamSystem::sample_view_rays(int frame, int count) {
    CameraIntrinsics intr = seq_.intrinsics;
    intr.edge_crop = cfg_.edge_crop;
    const Frame& fr = seq_.frames[frame];
    RaySamplingConfig scfg{cfg_.n_stratified, cfg_.n_importance, cfg_.truncation, 0.05};

    std::vector<RaySpec> rays;
    rays.reserve(count);
    const int u_span = intr.width - 2 * intr.edge_crop;
    const int v_span = intr.height - 2 * intr.edge_crop;
    int guard = 0;
    while (int(rays.size()) < count && guard < count * 16) {
        ++guard;
        const int u = intr.edge_crop + rng_.uniform_int(u_span);
        const int v = intr.edge_crop + rng_.uniform_int(v_span);
        const Vec3 dir_cam = intr.pixel_dir(u, v);
        const double dn = dir_cam.norm();
        const Ray ray{frame_poses_[frame].translation, frame_poses_[frame].rotate(dir_cam) / dn};
        const auto nf = ray_near_far(ray, cfg_.scene_bounds, scfg.near_clamp);
        if (!nf) continue;
        RaySpec spec;
        spec.pose_index = frame;
        spec.u = u;
        spec.v = v;
        spec.sensor_color = fr.color.rgb(u, v);
        const double sensor_z = fr.depth.at(u, v);
        spec.sensor_depth = sensor_z > 0.0 ? sensor_z * dn : 0.0;
        spec.distances = sample_ray_distances(nf->first, nf->second, spec.sensor_depth, scfg, rng_);
        rays.push_back(std::move(spec));
    }
    return rays;
}

SlamSystem::BatchSetup SlamSystem::build_batch(const std::vector<int>& views,
                                               const std::vector<int>& ray_counts, OptimMode mode) {
    BatchSetup setup;
    setup.view_frames = views;
    setup.record.intrinsics = seq_.intrinsics;
    setup.record.intrinsics.edge_crop = cfg_.edge_crop;
    setup.record.mode = mode;
    setup.record.weights = cfg_.weights(mode);
    setup.record.truncation = cfg_.truncation;
    setup.record.spacing_scaled = cfg_.spacing_scaled_density;
    for (size_t i = 0; i < views.size(); ++i) {
        auto rays = sample_view_rays(views[i], ray_counts[i]);
        for (auto& r : rays) setup.record.rays.push_back(std::move(r));
    }
    return setup;
}

void SlamSystem::insert_keyframe(int frame, InsertReason reason) {
    if (is_keyframe(frame)) return;
    keyframes_.push_back(Keyframe{frame, reason});
    events_.push_back("keyframe " + std::to_string(frame) + " (" + reason_string(reason) + ")");
}

bool SlamSystem::is_keyframe(int frame) const {
    return std::any_of(keyframes_.begin(), keyframes_.end(),
                       [frame](const Keyframe& k) { return k.frame_index == frame; });
}

void SlamSystem::init_first_frame() {
    frame_poses_[0] = seq_.frames[0].has_gt_pose ? seq_.frames[0].gt_pose : Pose{};
    BatchSetup setup = build_batch({0}, {cfg_.mapping_rays}, OptimMode::mapping);
    double final_loss = 0.0;
    optimize_mapping(setup.record, {}, cfg_.first_frame_iterations, final_loss);
    insert_keyframe(0, InsertReason::first);
    trace_.push_back(TraceRow{0, 0.0, 0.0, "init", final_loss, frame_poses_[0]});
    frames_processed_ = 1;
}

void SlamSystem::optimize_mapping(BatchRecord& record, const std::vector<int>& optimized_poses,
                                  int iterations, double& final_loss) {
    BlockSelection sel = BlockSelection::field_only(frame_poses_.size());
    if (cfg_.ba_optimize_poses)
        for (const int p : optimized_poses) sel.poses[p] = 1;
    // First keyframe is the gauge anchor and never moves.
    if (!keyframes_.empty()) sel.poses[keyframes_.front().frame_index] = 0;

    std::map<int, std::pair<AdamState, AdamState>> pose_states;
    for (int it = 0; it < iterations; ++it) {
        const MaskSummary masks = compute_masks(field_, frame_poses_, record,
                                                cfg_.pixel_uncertainty_threshold,
                                                !cfg_.uncertainty_reweighting);
        GradientReport rep = compute_gradients(field_, frame_poses_, record, sel);
        final_loss = rep.loss.total;

        adam_step(field_.geometry_grid().params(), rep.geometry_grid, geo_grid_state_,
                  cfg_.lr_geometry_grid);
        adam_step(field_.appearance_grid().params(), rep.appearance_grid, app_grid_state_,
                  cfg_.lr_appearance_grid);
        adam_step(field_.geometry_decoder().params(), rep.geometry_decoder, geo_dec_state_,
                  cfg_.lr_decoder);
        adam_step(field_.appearance_decoder().params(), rep.appearance_decoder, app_dec_state_,
                  cfg_.lr_decoder);
        double alpha_value = field_.alpha();
        adam_step(std::span<double>(&alpha_value, 1), std::span<const double>(&rep.alpha, 1),
                  alpha_state_, cfg_.lr_decoder);
        field_.set_alpha(alpha_value);

        for (size_t p = 0; p < frame_poses_.size(); ++p) {
            if (!sel.poses[p]) continue;
            auto& [rot_state, trans_state] = pose_states[int(p)];
            Vec3 rot_delta = Vec3::Zero(), trans_delta = Vec3::Zero();
            double rot_buf[3] = {rep.pose_rotation[p].x(), rep.pose_rotation[p].y(),
                                 rep.pose_rotation[p].z()};
            double trans_buf[3] = {rep.pose_translation[p].x(), rep.pose_translation[p].y(),
                                   rep.pose_translation[p].z()};
            adam_step(std::span<double>(rot_delta.data(), 3), std::span<const double>(rot_buf, 3),
                      rot_state, cfg_.lr_rotation * cfg_.ba_pose_lr_scale);
            adam_step(std::span<double>(trans_delta.data(), 3),
                      std::span<const double>(trans_buf, 3), trans_state,
                      cfg_.lr_translation * cfg_.ba_pose_lr_scale);
            frame_poses_[p].apply_increment(rot_delta, trans_delta);
        }
        (void)masks;
    }
}

Pose SlamSystem::track_from(int frame, const Pose& init) {
    frame_poses_[frame] = init;
    optimize_tracking(frame);
    return frame_poses_[frame];
}

TrackResult SlamSystem::track_frame(int frame) {
    // Constant-velocity initialization from the two most recent poses.
    if (frame >= 2) {
        const Pose& prev = frame_poses_[frame - 1];
        const Pose rel = frame_poses_[frame - 2].inverse().compose(prev);
        frame_poses_[frame] = prev.compose(rel);
    } else {
        frame_poses_[frame] = frame_poses_[frame - 1];
    }
    return optimize_tracking(frame);
}

TrackResult SlamSystem::optimize_tracking(int frame) {
    const uint64_t field_digest = field_.param_digest();
    BatchSetup setup = build_batch({frame}, {cfg_.tracking_rays}, OptimMode::tracking);
    BlockSelection sel = BlockSelection::pose_only(frame_poses_.size(), frame);

    AdamState rot_state, trans_state;
    TrackResult result;
    double lr_scale = 1.0;
    bool resampled = false;
    for (int it = 0; it < cfg_.tracking_iterations; ++it) {
        MaskSummary masks = compute_masks(field_, frame_poses_, setup.record,
                                          cfg_.pixel_uncertainty_threshold,
                                          !cfg_.uncertainty_reweighting);
        if (masks.all_masked_rgb) {
            if (!resampled) {
                resampled = true;
                events_.push_back("frame " + std::to_string(frame) +
                                  ": all-masked tracking batch, resampled");
                setup = build_batch({frame}, {cfg_.tracking_rays}, OptimMode::tracking);
                masks = compute_masks(field_, frame_poses_, setup.record,
                                      cfg_.pixel_uncertainty_threshold,
                                      !cfg_.uncertainty_reweighting);
            }
            if (masks.all_masked_rgb) {
                events_.push_back("frame " + std::to_string(frame) +
                                  ": tracking proceeding unmasked");
                masks = compute_masks(field_, frame_poses_, setup.record,
                                      cfg_.pixel_uncertainty_threshold, true);
            }
        }
        result.beta = masks.image_beta;

        GradientReport rep = compute_gradients(field_, frame_poses_, setup.record, sel);
        result.final_loss = rep.loss.total;

        Vec3 rot_delta = Vec3::Zero(), trans_delta = Vec3::Zero();
        double rot_buf[3] = {rep.pose_rotation[frame].x(), rep.pose_rotation[frame].y(),
                             rep.pose_rotation[frame].z()};
        double trans_buf[3] = {rep.pose_translation[frame].x(), rep.pose_translation[frame].y(),
                               rep.pose_translation[frame].z()};
        adam_step(std::span<double>(rot_delta.data(), 3), std::span<const double>(rot_buf, 3),
                  rot_state, cfg_.lr_rotation * lr_scale);
        adam_step(std::span<double>(trans_delta.data(), 3), std::span<const double>(trans_buf, 3),
                  trans_state, cfg_.lr_translation * lr_scale);
        frame_poses_[frame].apply_increment(rot_delta, trans_delta);
        lr_scale *= cfg_.tracking_lr_decay;
    }

    if (field_.param_digest() != field_digest)
        throw std::runtime_error("slam: tracking mutated the scene field");
    return result;
}

std::vector<std::pair<int, double>> SlamSystem::loop_covisibility(int frame) {
    CovisibilityConfig ccfg{cfg_.covis_pixels, cfg_.covis_samples, cfg_.truncation, 0.05};
    CameraIntrinsics intr = seq_.intrinsics;
    intr.edge_crop = cfg_.edge_crop;
    std::vector<std::pair<int, double>> out;
    out.reserve(keyframes_.size());
    Rng covis_rng = rng_.fork(0x600 + frame);
    for (const Keyframe& kf : keyframes_) {
        const double oc =
            overlap_coefficient(frame_poses_[kf.frame_index], seq_.frames[kf.frame_index].depth,
                                frame_poses_[frame], intr, cfg_.scene_bounds, ccfg, covis_rng);
        out.emplace_back(kf.frame_index, oc);
    }
    return out;
}

void SlamSystem::map_step(ExtraMapping mode, int frame, int loop_anchor) {
    std::vector<int> selected;
    if (mode == ExtraMapping::lba) {
        // Keyframes most co-visible with the current frame, current -> keyframe.
        CovisibilityConfig ccfg{cfg_.covis_pixels, cfg_.covis_samples, cfg_.truncation, 0.05};
        CameraIntrinsics intr = seq_.intrinsics;
        intr.edge_crop = cfg_.edge_crop;
        Rng covis_rng = rng_.fork(0x700 + frame);
        std::vector<std::pair<double, int>> ranked;
        for (const Keyframe& kf : keyframes_) {
            const double oc = overlap_coefficient(frame_poses_[frame], seq_.frames[frame].depth,
                                                  frame_poses_[kf.frame_index], intr,
                                                  cfg_.scene_bounds, ccfg, covis_rng);
            ranked.emplace_back(oc, kf.frame_index);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (size_t i = 0; i < ranked.size() && int(i) < cfg_.local_window; ++i)
            selected.push_back(ranked[i].second);
    } else if (mode == ExtraMapping::llco) {
        for (const Keyframe& kf : keyframes_)
            if (kf.frame_index >= loop_anchor) selected.push_back(kf.frame_index);
    } else {
        for (const Keyframe& kf : keyframes_) selected.push_back(kf.frame_index);
    }
    if (selected.empty()) {
        events_.push_back("frame " + std::to_string(frame) + ": empty keyframe selection");
    }
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

    std::vector<int> views = selected;
    if (!std::count(views.begin(), views.end(), frame)) views.push_back(frame);

    const int n_views = int(views.size());
    const int per_view = std::max(1, cfg_.mapping_rays / n_views);
    std::vector<int> counts(views.size(), per_view);
    // Remainder goes to the current frame.
    int assigned = per_view * (n_views - 1);
    for (size_t i = 0; i < views.size(); ++i)
        if (views[i] == frame) counts[i] = std::max(1, cfg_.mapping_rays - assigned);

    BatchSetup setup = build_batch(views, counts, OptimMode::mapping);
    std::vector<int> optimized = views;
    double final_loss = 0.0;
    optimize_mapping(setup.record, optimized, cfg_.mapping_iterations, final_loss);

    InsertReason reason = mode == ExtraMapping::lba     ? InsertReason::local
                          : mode == ExtraMapping::llco  ? InsertReason::llco
                                                        : InsertReason::constant;
    insert_keyframe(frame, reason);
    if (!trace_.empty() && trace_.back().frame == frame) trace_.back().loss = final_loss;
}

void SlamSystem::global_ba(int frame) { map_step(ExtraMapping::none, frame, -1); }

void SlamSystem::run() {
    init_first_frame();
    for (int i = 1; i < int(seq_.frames.size()); ++i) {
        const TrackResult tr = track_frame(i);
        const auto covis = loop_covisibility(i);
        const ScheduleDecision d = schedule(i, tr.beta, covis, cfg_);
        trace_.push_back(
            TraceRow{i, tr.beta, d.max_loop_oc, d.action_string(), tr.final_loss, Pose{}});
        if (d.extra == ExtraMapping::lba)
            map_step(ExtraMapping::lba, i);
        else if (d.extra == ExtraMapping::llco)
            map_step(ExtraMapping::llco, i, d.loop_anchor);
        if (d.do_gba) global_ba(i);
        trace_.back().pose = frame_poses_[i];
        frames_processed_ = i + 1;
    }
}

void SlamSystem::write_outputs(const std::string& out_dir, bool diagnostics) const {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<double> timestamps;
    std::vector<Pose> poses;
    for (int i = 0; i < frames_processed_; ++i) {
        timestamps.push_back(seq_.frames[i].timestamp);
        poses.push_back(frame_poses_[i]);
    }
    save_tum_trajectory((fs::path(out_dir) / "trajectory.txt").string(), timestamps, poses);

    std::ofstream trace(fs::path(out_dir) / "trace.csv");
    trace.precision(17);
    trace << "frame,beta,oc_max,action,loss,tx,ty,tz,qx,qy,qz,qw\n";
    for (const TraceRow& r : trace_) {
        trace << r.frame << "," << r.beta << "," << r.oc_max << "," << r.action << "," << r.loss
              << "," << r.pose.translation.x() << "," << r.pose.translation.y() << ","
              << r.pose.translation.z() << "," << r.pose.rotation.x() << ","
              << r.pose.rotation.y() << "," << r.pose.rotation.z() << "," << r.pose.rotation.w()
              << "\n";
    }

    field_.save((fs::path(out_dir) / "checkpoint.bin").string());

    if (diagnostics) {
        std::ofstream diag(fs::path(out_dir) / "diagnostics.csv");
        diag.precision(17);
        diag << "frame,beta,trans_speed,ang_speed_deg\n";
        for (const TraceRow& r : trace_) {
            double ts = 0.0, as = 0.0;
            if (r.frame >= 1) {
                const Pose& a = frame_poses_[r.frame - 1];
                const Pose& b = frame_poses_[r.frame];
                ts = (b.translation - a.translation).norm();
                as = Pose::rotation_angle(a, b) * 180.0 / M_PI;
            }
            diag << r.frame << "," << r.beta << "," << ts << "," << as << "\n";
        }
    }
}

} // namespace gridslam
