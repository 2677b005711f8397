#pragma once

#include <string>

#include "gridslam/frame_sequence.hpp"

namespace gridslam {

// TUM RGB-D directory: rgb.txt / depth.txt index files plus optional
// groundtruth.txt. Color and depth are associated by nearest timestamp with
// a 0.02 s ceiling; unmatched frames are dropped. Depth PNGs are 16-bit with
// meters = raw / 5000.
FrameSequence load_tum(const std::string& directory);

// Replica-style directory: results/frameNNNNNN.jpg, results/depthNNNNNN.png,
// traj.txt with one row-major 4x4 camera-to-world matrix per line. Depth
// meters = raw / 6553.5.
FrameSequence load_replica(const std::string& directory);

// Writes a sequence in the Replica layout so load_replica round-trips the
// depths bitwise (depth values are quantized to the 16-bit encoding first).
void write_replica(const FrameSequence& seq, const std::string& directory);

// Estimated/ground-truth trajectory text: one line per frame,
// "timestamp tx ty tz qx qy qz qw".
void save_tum_trajectory(const std::string& path, const std::vector<double>& timestamps,
                         const std::vector<Pose>& poses);
std::vector<std::pair<double, Pose>> load_tum_trajectory(const std::string& path);

// Intrinsics sidecar (camera.txt) used by the Replica layout writer/loader.
void save_intrinsics(const std::string& path, const CameraIntrinsics& intr);
CameraIntrinsics load_intrinsics(const std::string& path);

constexpr double kTumDepthScale = 5000.0;
constexpr double kReplicaDepthScale = 6553.5;

} // namespace gridslam
