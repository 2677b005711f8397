#pragma once

#include <string>

#include "gridslam/frame_sequence.hpp"

namespace gridslam::detail {

Image load_color_image(const std::string& path);
Image load_depth_png(const std::string& path, double scale);
void write_color_jpg(const Image& img, const std::string& path);
void write_color_png(const Image& img, const std::string& path);
void write_depth_png(const Image& img, const std::string& path, double scale);
void write_gray_png(const Image& img, const std::string& path); // values in [0, 1]

// Depth quantized to the 16-bit on-disk encoding, so in-memory sequences
// match their on-disk round trip bitwise.
double quantize_depth(double meters, double scale);

} // namespace gridslam::detail
