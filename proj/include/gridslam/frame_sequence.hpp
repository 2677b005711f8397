#pragma once

#include <string>
#include <vector>

#include "gridslam/camera.hpp"

namespace gridslam {

// Row-major float image, 3 channels in [0, 1] for color and 1 channel in
// meters for depth (0 = invalid).
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<double> data;

    static Image create(int w, int h, int c) { return Image{w, h, c, std::vector<double>(size_t(w) * h * c, 0.0)}; }
    double& at(int x, int y, int c = 0) { return data[(size_t(y) * width + x) * channels + c]; }
    double at(int x, int y, int c = 0) const { return data[(size_t(y) * width + x) * channels + c]; }
    Vec3 rgb(int x, int y) const { return Vec3(at(x, y, 0), at(x, y, 1), at(x, y, 2)); }
};

struct Frame {
    double timestamp = 0.0;
    Image color; // 3 channels
    Image depth; // 1 channel, meters
    bool has_gt_pose = false;
    Pose gt_pose;
};

struct FrameSequence {
    std::vector<Frame> frames;
    CameraIntrinsics intrinsics;
    std::string dataset_tag;

    size_t size() const { return frames.size(); }
    bool has_gt_trajectory() const;
};

} // namespace gridslam
