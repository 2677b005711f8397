#include "gridslam/camera.hpp"

#include <stdexcept>

namespace gridslam {

Ray generate_ray(const Pose& pose, const CameraIntrinsics& intr, double u, double v) {
    if (intr.fx <= 0 || intr.fy <= 0) throw std::runtime_error("camera: invalid focal length");
    if (!intr.inside_crop(u, v))
        throw std::runtime_error("camera: pixel outside cropped image region");
    Ray r;
    r.origin = pose.translation;
    r.dir = pose.rotate(intr.pixel_dir(u, v)).normalized();
    return r;
}

} // namespace gridslam
