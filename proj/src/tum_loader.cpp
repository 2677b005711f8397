#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridslam/dataset_io.hpp"
#include "image_io.hpp"

namespace gridslam {
namespace {

namespace fs = std::filesystem;

struct IndexedFile {
    double timestamp;
    std::string path;
};

std::vector<IndexedFile> read_index(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("tum: missing index file " + file.string());
    std::vector<IndexedFile> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        IndexedFile f;
        if (ls >> f.timestamp >> f.path) out.push_back(f);
    }
    return out;
}

} // namespace

void save_intrinsics(const std::string& path, const CameraIntrinsics& intr) {
    std::ofstream out(path);
    out.precision(17);
    out << intr.fx << " " << intr.fy << " " << intr.cx << " " << intr.cy << " " << intr.width << " "
        << intr.height << "\n";
}

CameraIntrinsics load_intrinsics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("intrinsics: cannot open " + path);
    CameraIntrinsics intr;
    if (!(in >> intr.fx >> intr.fy >> intr.cx >> intr.cy >> intr.width >> intr.height))
        throw std::runtime_error("intrinsics: malformed file " + path);
    return intr;
}

void save_tum_trajectory(const std::string& path, const std::vector<double>& timestamps,
                         const std::vector<Pose>& poses) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trajectory: cannot open " + path + " for writing");
    out.precision(17);
    for (size_t i = 0; i < poses.size(); ++i) {
        const Pose& p = poses[i];
        const double ts = i < timestamps.size() ? timestamps[i] : double(i);
        out << ts << " " << p.translation.x() << " " << p.translation.y() << " "
            << p.translation.z() << " " << p.rotation.x() << " " << p.rotation.y() << " "
            << p.rotation.z() << " " << p.rotation.w() << "\n";
    }
}

std::vector<std::pair<double, Pose>> load_tum_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trajectory: cannot open " + path);
    std::vector<std::pair<double, Pose>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double ts, tx, ty, tz, qx, qy, qz, qw;
        if (ls >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw) {
            Pose p;
            p.translation = Vec3(tx, ty, tz);
            p.rotation = Quat(qw, qx, qy, qz).normalized();
            out.emplace_back(ts, p);
        }
    }
    return out;
}

FrameSequence load_tum(const std::string& directory) {
    const fs::path dir(directory);
    const auto rgb = read_index(dir / "rgb.txt");
    const auto depth = read_index(dir / "depth.txt");
    if (depth.empty()) throw std::runtime_error("tum: depth index is empty");

    std::vector<std::pair<double, Pose>> gt;
    if (fs::exists(dir / "groundtruth.txt"))
        gt = load_tum_trajectory((dir / "groundtruth.txt").string());

    FrameSequence seq;
    seq.dataset_tag = "tum";
    for (const IndexedFile& rf : rgb) {
        // Nearest depth frame within the association window; otherwise drop.
        size_t best = 0;
        double best_dt = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < depth.size(); ++i) {
            const double dt = std::abs(depth[i].timestamp - rf.timestamp);
            if (dt < best_dt) {
                best_dt = dt;
                best = i;
            }
        }
        if (best_dt > 0.02) continue;

        Frame frame;
        frame.timestamp = rf.timestamp;
        frame.color = detail::load_color_image((dir / rf.path).string());
        frame.depth = detail::load_depth_png((dir / depth[best].path).string(), kTumDepthScale);
        if (frame.color.width != frame.depth.width || frame.color.height != frame.depth.height)
            throw std::runtime_error("tum: color/depth dimension mismatch at " + rf.path);
        if (!gt.empty()) {
            size_t gi = 0;
            double gdt = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < gt.size(); ++i) {
                const double dt = std::abs(gt[i].first - rf.timestamp);
                if (dt < gdt) {
                    gdt = dt;
                    gi = i;
                }
            }
            frame.has_gt_pose = true;
            frame.gt_pose = gt[gi].second;
        }
        seq.frames.push_back(std::move(frame));
    }
    if (seq.frames.empty()) throw std::runtime_error("tum: no associated frames in " + directory);

    if (fs::exists(dir / "camera.txt")) {
        seq.intrinsics = load_intrinsics((dir / "camera.txt").string());
    } else {
        // Kinect factory defaults, the usual fallback for uncalibrated runs.
        seq.intrinsics.fx = 525.0;
        seq.intrinsics.fy = 525.0;
        seq.intrinsics.cx = 319.5;
        seq.intrinsics.cy = 239.5;
    }
    seq.intrinsics.width = seq.frames.front().color.width;
    seq.intrinsics.height = seq.frames.front().color.height;
    return seq;
}

} // namespace gridslam
