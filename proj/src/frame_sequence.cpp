#include "gridslam/frame_sequence.hpp"

#include <algorithm>

namespace gridslam {

bool FrameSequence::has_gt_trajectory() const {
    return !frames.empty() &&
           std::all_of(frames.begin(), frames.end(), [](const Frame& f) { return f.has_gt_pose; });
}

} // namespace gridslam
