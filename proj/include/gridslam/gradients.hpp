#pragma once

#include <span>
#include <vector>

#include "gridslam/losses.hpp"

namespace gridslam {

// Which parameter blocks are registered for a gradient pass. Unregistered
// blocks are reported empty (identically zero) and skip their accumulation.
struct BlockSelection {
    bool geometry_grid = false;
    bool appearance_grid = false;
    bool geometry_decoder = false;
    bool appearance_decoder = false;
    bool alpha = false;
    std::vector<uint8_t> poses; // per pose index; empty = no pose blocks

    static BlockSelection field_only(size_t n_poses) {
        BlockSelection s;
        s.geometry_grid = s.appearance_grid = s.geometry_decoder = s.appearance_decoder = s.alpha =
            true;
        s.poses.assign(n_poses, 0);
        return s;
    }
    static BlockSelection pose_only(size_t n_poses, size_t which) {
        BlockSelection s;
        s.poses.assign(n_poses, 0);
        s.poses[which] = 1;
        return s;
    }
    static BlockSelection all(size_t n_poses) {
        BlockSelection s = field_only(n_poses);
        s.poses.assign(n_poses, 1);
        return s;
    }
};

struct GradientReport {
    std::vector<double> geometry_grid;
    std::vector<double> appearance_grid;
    std::vector<double> geometry_decoder;
    std::vector<double> appearance_decoder;
    double alpha = 0.0;
    std::vector<Vec3> pose_rotation;    // local axis-angle increment frame
    std::vector<Vec3> pose_translation; // world frame
    double max_abs = 0.0;
    LossBreakdown loss;
};

// Exact reverse-mode derivatives of the recorded pipeline's total loss with
// respect to the registered blocks. Pose derivatives are taken in the local
// increment parameterization used by Pose::apply_increment. Ray accumulation
// runs in fixed contiguous chunks merged in order, so results are
// reproducible for a fixed thread count.
GradientReport compute_gradients(const SceneField& field, std::span<const Pose> poses,
                                 const BatchRecord& record, const BlockSelection& selection);

} // namespace gridslam
