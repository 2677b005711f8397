#pragma once

#include "gridslam/geometry.hpp"

namespace gridslam {

struct CameraIntrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    int edge_crop = 0; // pixels culled at the image border

    bool inside_crop(double u, double v) const {
        return u >= edge_crop && u <= width - 1 - edge_crop && v >= edge_crop &&
               v <= height - 1 - edge_crop;
    }

    // Camera-frame direction through pixel (u, v), not normalized (z = 1).
    Vec3 pixel_dir(double u, double v) const { return Vec3((u - cx) / fx, (v - cy) / fy, 1.0); }

    // Projects a camera-frame point; z is returned so callers can reject
    // points behind the camera.
    Vec3 project(const Vec3& p_cam) const {
        return Vec3(fx * p_cam.x() / p_cam.z() + cx, fy * p_cam.y() / p_cam.z() + cy, p_cam.z());
    }
};

struct Ray {
    Vec3 origin;
    Vec3 dir; // unit
};

// Pinhole ray for a pixel inside the cropped region; throws otherwise.
Ray generate_ray(const Pose& pose, const CameraIntrinsics& intr, double u, double v);

} // namespace gridslam
