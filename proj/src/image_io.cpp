#include "image_io.hpp"

#include <cmath>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>

namespace gridslam::detail {

Image load_color_image(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty()) throw std::runtime_error("image: cannot read " + path);
    Image img = Image::create(m.cols, m.rows, 3);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            const cv::Vec3b bgr = m.at<cv::Vec3b>(y, x);
            img.at(x, y, 0) = bgr[2] / 255.0;
            img.at(x, y, 1) = bgr[1] / 255.0;
            img.at(x, y, 2) = bgr[0] / 255.0;
        }
    return img;
}

Image load_depth_png(const std::string& path, double scale) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw std::runtime_error("depth: cannot read " + path);
    if (m.type() != CV_16UC1)
        throw std::runtime_error("depth: expected 16-bit single-channel PNG: " + path);
    Image img = Image::create(m.cols, m.rows, 1);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) img.at(x, y) = m.at<uint16_t>(y, x) / scale;
    return img;
}

namespace {

cv::Mat to_bgr8(const Image& img) {
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            auto q = [&](int c) {
                const double v = std::clamp(img.at(x, y, c), 0.0, 1.0);
                return static_cast<uint8_t>(std::lround(v * 255.0));
            };
            m.at<cv::Vec3b>(y, x) = cv::Vec3b(q(2), q(1), q(0));
        }
    return m;
}

} // namespace

void write_color_jpg(const Image& img, const std::string& path) {
    if (!cv::imwrite(path, to_bgr8(img), {cv::IMWRITE_JPEG_QUALITY, 98}))
        throw std::runtime_error("image: cannot write " + path);
}

void write_color_png(const Image& img, const std::string& path) {
    if (!cv::imwrite(path, to_bgr8(img)))
        throw std::runtime_error("image: cannot write " + path);
}

void write_depth_png(const Image& img, const std::string& path, double scale) {
    cv::Mat m(img.height, img.width, CV_16UC1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double raw = std::clamp(std::round(img.at(x, y) * scale), 0.0, 65535.0);
            m.at<uint16_t>(y, x) = static_cast<uint16_t>(raw);
        }
    if (!cv::imwrite(path, m)) throw std::runtime_error("depth: cannot write " + path);
}

void write_gray_png(const Image& img, const std::string& path) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double v = std::clamp(img.at(x, y), 0.0, 1.0);
            m.at<uint8_t>(y, x) = static_cast<uint8_t>(std::lround(v * 255.0));
        }
    if (!cv::imwrite(path, m)) throw std::runtime_error("image: cannot write " + path);
}

double quantize_depth(double meters, double scale) {
    const double raw = std::clamp(std::round(meters * scale), 0.0, 65535.0);
    return raw / scale;
}

} // namespace gridslam::detail
