#include "gridslam/schedule.hpp"

namespace gridslam {

std::string ScheduleDecision::action_string() const {
    std::string s;
    switch (extra) {
        case ExtraMapping::none: s = "none"; break;
        case ExtraMapping::lba: s = "lba"; break;
        case ExtraMapping::llco: s = "llco"; break;
    }
    if (do_gba) s = s == "none" ? "gba" : s + "+gba";
    return s;
}

ScheduleDecision schedule(int frame_index, double image_beta,
                          std::span<const std::pair<int, double>> keyframe_covisibility,
                          const RunConfig& cfg) {
    ScheduleDecision d;
    d.beta = image_beta;
    for (const auto& [kf_frame, oc] : keyframe_covisibility) {
        if (frame_index - kf_frame < cfg.loop_min_frame_gap) continue;
        if (oc > d.max_loop_oc) {
            d.max_loop_oc = oc;
            if (oc > cfg.covisibility_threshold) d.loop_anchor = kf_frame;
        }
    }
    if (image_beta > cfg.image_uncertainty_threshold) {
        d.extra = ExtraMapping::lba;
        d.loop_anchor = -1;
    } else if (d.loop_anchor >= 0) {
        d.extra = ExtraMapping::llco;
    }
    d.do_gba = frame_index % cfg.mapping_interval == 0;
    return d;
}

} // namespace gridslam
