#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridslam/adam.hpp"
#include "gridslam/covisibility.hpp"
#include "gridslam/frame_sequence.hpp"
#include "gridslam/gradients.hpp"
#include "gridslam/schedule.hpp"

namespace gridslam {

enum class InsertReason { first, constant, local, llco };

struct Keyframe {
    int frame_index = 0;
    InsertReason reason = InsertReason::first;
};

struct TraceRow {
    int frame = 0;
    double beta = 0.0;
    double oc_max = 0.0;
    std::string action;
    double loss = 0.0;
    Pose pose;
};

struct TrackResult {
    double beta = 1.0;
    double final_loss = 0.0;
};

// Sequential tracking/mapping loop: per-frame pose tracking against the
// frozen field, constant global BA every n frames, uncertainty-activated
// local BA, and co-visibility-triggered local loop closure. Ray batches are
// drawn once per optimization call and shared by its iterations.
class SlamSystem {
public:
    SlamSystem(const RunConfig& cfg, const FrameSequence& seq);

    void run();

    void init_first_frame();
    TrackResult track_frame(int frame);
    // Tracking with an explicit initial pose; returns the optimized pose.
    Pose track_from(int frame, const Pose& init);
    void set_pose(int frame, const Pose& pose) { frame_poses_[frame] = pose; }
    // Covisibility of every keyframe toward the current frame (loop
    // detection direction); pairs of (keyframe frame index, OC).
    std::vector<std::pair<int, double>> loop_covisibility(int frame);
    void map_step(ExtraMapping mode, int frame, int loop_anchor = -1);
    void global_ba(int frame);

    const SceneField& field() const { return field_; }
    SceneField& field() { return field_; }
    const std::vector<Pose>& poses() const { return frame_poses_; }
    const std::vector<Keyframe>& keyframes() const { return keyframes_; }
    const std::vector<TraceRow>& trace() const { return trace_; }
    const std::vector<std::string>& events() const { return events_; }

    // trajectory.txt (TUM format), trace.csv, checkpoint.bin and, when
    // diagnostics is set, the per-frame uncertainty/velocity CSV.
    void write_outputs(const std::string& out_dir, bool diagnostics = false) const;

private:
    struct BatchSetup {
        BatchRecord record;
        std::vector<int> view_frames;
    };

    BatchSetup build_batch(const std::vector<int>& views, const std::vector<int>& ray_counts,
                           OptimMode mode);
    std::vector<RaySpec> sample_view_rays(int frame, int count);
    TrackResult optimize_tracking(int frame);
    void optimize_mapping(BatchRecord& record, const std::vector<int>& optimized_poses,
                          int iterations, double& final_loss);
    void insert_keyframe(int frame, InsertReason reason);
    bool is_keyframe(int frame) const;

    RunConfig cfg_;
    const FrameSequence& seq_;
    Rng rng_;
    SceneField field_;
    std::vector<Pose> frame_poses_;
    std::vector<Keyframe> keyframes_;
    std::vector<TraceRow> trace_;
    std::vector<std::string> events_;
    int frames_processed_ = 0;

    AdamState geo_grid_state_, app_grid_state_, geo_dec_state_, app_dec_state_, alpha_state_;
};

} // namespace gridslam
