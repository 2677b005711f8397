#pragma once

#include <span>

#include "gridslam/camera.hpp"
#include "gridslam/triangle_mesh.hpp"

namespace gridslam {

// Keeps triangles whose centroid falls inside at least one camera frustum
// (positive camera-space depth and inside the cropped image). Estimated
// poses are used, so reconstruction errors show up in the evaluation.
TriangleMesh cull_mesh(const TriangleMesh& mesh, std::span<const Pose> poses,
                       const CameraIntrinsics& intrinsics);

} // namespace gridslam
