#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gridslam/gradients.hpp"

namespace gridslam {

// One checkable parameter block: get/set move a single coordinate (absolute
// value; set(k, get(k)) restores exactly), analytic holds the gradient under
// test. coords selects a subset; empty means every coordinate.
struct FdBlock {
    std::string name;
    int dim = 0;
    std::function<double(int)> get;
    std::function<void(int, double)> set;
    std::vector<double> analytic;
    std::vector<int> coords;
};

struct FdBlockResult {
    std::string name;
    double max_rel = 0.0;
    double mean_rel = 0.0;
    int checked = 0; // matched at the requested h
    int flagged = 0; // |fd| below the denominator floor, reported not failed
    int kinks = 0;   // kink-adjacent at h, verified in the h -> 0 limit
    int failed = 0;  // matched neither at h nor in the limit
};

// Central differences per coordinate against the analytic gradient.
// Coordinates with |fd| <= fd_floor are flagged and excluded from the
// relative-error statistics. The loss is piecewise smooth (ReLU decoders,
// trilinear cells): a probe that straddles a kink measures a blend of two
// one-sided slopes, so a coordinate that misses the tolerance at h is
// re-probed at h/10 and h/100 and counts as kink-adjacent when the
// differences converge to the analytic value; only coordinates that match
// neither way are failures.
std::vector<FdBlockResult> finite_difference_check(const std::function<double()>& loss,
                                                   std::vector<FdBlock>& blocks, double h,
                                                   double fd_floor = 1e-8, double tolerance = 1e-4);

// FD blocks for the full recorded pipeline: both grids, both decoders,
// alpha, and rotation/translation of each selected pose. Grid and decoder
// coordinates are subsampled (seeded) to keep the check tractable; pose and
// alpha coordinates are always all checked. Touched coordinates (nonzero
// analytic gradient) are preferred when subsampling.
std::vector<FdBlock> pipeline_fd_blocks(SceneField& field, std::vector<Pose>& poses,
                                        const BatchRecord& record, const GradientReport& report,
                                        const BlockSelection& selection, int coords_per_block,
                                        Rng& rng);

std::string format_fd_table(const std::vector<FdBlockResult>& results);

} // namespace gridslam
