#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gridslam/dataset_io.hpp"
#include "image_io.hpp"

namespace gridslam {
namespace {

namespace fs = std::filesystem;

std::string frame_name(const char* prefix, int i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%06d%s", prefix, i, ext);
    return buf;
}

} // namespace

FrameSequence load_replica(const std::string& directory) {
    const fs::path dir(directory);
    const fs::path results = dir / "results";
    if (!fs::exists(dir / "traj.txt"))
        throw std::runtime_error("replica: missing traj.txt in " + directory);

    std::vector<Pose> traj;
    {
        std::ifstream in(dir / "traj.txt");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            Mat4 m;
            bool ok = true;
            for (int r = 0; r < 4 && ok; ++r)
                for (int c = 0; c < 4 && ok; ++c) ok = bool(ls >> m(r, c));
            if (!ok) throw std::runtime_error("replica: malformed traj.txt line");
            traj.push_back(Pose::from_matrix(m));
        }
    }

    int count = 0;
    while (fs::exists(results / frame_name("frame", count, ".jpg"))) ++count;
    if (count == 0) throw std::runtime_error("replica: no frames under " + results.string());
    if (size_t(count) != traj.size())
        throw std::runtime_error("replica: frame count (" + std::to_string(count) +
                                 ") does not match trajectory length (" +
                                 std::to_string(traj.size()) + ")");

    FrameSequence seq;
    seq.dataset_tag = "replica";
    for (int i = 0; i < count; ++i) {
        Frame f;
        f.timestamp = double(i);
        f.color = detail::load_color_image((results / frame_name("frame", i, ".jpg")).string());
        f.depth = detail::load_depth_png((results / frame_name("depth", i, ".png")).string(),
                                         kReplicaDepthScale);
        if (f.color.width != f.depth.width || f.color.height != f.depth.height)
            throw std::runtime_error("replica: color/depth dimension mismatch at frame " +
                                     std::to_string(i));
        f.has_gt_pose = true;
        f.gt_pose = traj[i];
        seq.frames.push_back(std::move(f));
    }

    if (fs::exists(dir / "camera.txt")) {
        seq.intrinsics = load_intrinsics((dir / "camera.txt").string());
    } else {
        // Published render intrinsics, scaled to the stored resolution.
        const int w = seq.frames.front().color.width;
        const int h = seq.frames.front().color.height;
        seq.intrinsics.fx = 600.0 * w / 1200.0;
        seq.intrinsics.fy = 600.0 * w / 1200.0;
        seq.intrinsics.cx = (w - 1) / 2.0;
        seq.intrinsics.cy = (h - 1) / 2.0;
    }
    seq.intrinsics.width = seq.frames.front().color.width;
    seq.intrinsics.height = seq.frames.front().color.height;
    return seq;
}

void write_replica(const FrameSequence& seq, const std::string& directory) {
    const fs::path dir(directory);
    fs::create_directories(dir / "results");
    std::ofstream traj(dir / "traj.txt");
    if (!traj) throw std::runtime_error("replica: cannot write traj.txt under " + directory);
    traj.precision(17);
    for (size_t i = 0; i < seq.frames.size(); ++i) {
        const Frame& f = seq.frames[i];
        detail::write_color_jpg(f.color, (dir / "results" / frame_name("frame", int(i), ".jpg")).string());
        detail::write_depth_png(f.depth, (dir / "results" / frame_name("depth", int(i), ".png")).string(),
                                kReplicaDepthScale);
        const Mat4 m = f.gt_pose.matrix();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) traj << m(r, c) << (r == 3 && c == 3 ? "" : " ");
        traj << "\n";
    }
    save_intrinsics((dir / "camera.txt").string(), seq.intrinsics);
}

} // namespace gridslam
