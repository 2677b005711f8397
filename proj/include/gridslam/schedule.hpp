#pragma once

#include <span>
#include <string>
#include <utility>

#include "gridslam/run_config.hpp"

namespace gridslam {

enum class ExtraMapping { none, lba, llco };

struct ScheduleDecision {
    ExtraMapping extra = ExtraMapping::none;
    bool do_gba = false;
    int loop_anchor = -1; // keyframe frame index that triggered LLCO
    double beta = 0.0;
    double max_loop_oc = 0.0;

    std::string action_string() const;
};

// Per-frame mapping decision after tracking. Local BA fires on high
// image-level uncertainty and takes priority over loop closure; loop closure
// considers only keyframes at least loop_min_frame_gap frames older than the
// current frame. Constant global BA fires every mapping_interval frames,
// independent of the extra-mapping branch.
ScheduleDecision schedule(int frame_index, double image_beta,
                          std::span<const std::pair<int, double>> keyframe_covisibility,
                          const RunConfig& cfg);

} // namespace gridslam
