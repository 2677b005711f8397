#pragma once

#include <string>
#include <vector>

#include "gridslam/frame_sequence.hpp"

namespace gridslam {

// Analytic scene: an axis-aligned room (air-positive SDF) with solid
// primitives unioned in and optional subtractions carved out. The exact SDF
// doubles as the reconstruction oracle.
struct SdfPrimitive {
    enum class Type { sphere, box };
    Type type = Type::sphere;
    bool subtract = false;
    Vec3 center = Vec3::Zero();
    double radius = 0.5;             // sphere
    Vec3 half_extent = Vec3::Zero(); // box
};

struct SyntheticScene {
    Aabb room{Vec3(-1.5, -1.2, -1.5), Vec3(1.5, 1.2, 1.5)};
    std::vector<SdfPrimitive> primitives;

    // Orbit trajectory with look-at; world up is +y.
    Vec3 orbit_center = Vec3::Zero();
    double orbit_radius = 0.9;
    double orbit_height = 0.0;
    Vec3 look_target = Vec3::Zero();
    double start_deg = 0.0;
    double sweep_deg = 360.0;
    bool angle_ramp = false; // quadratic angle ramp: constant angular acceleration

    int frames = 20;
    int width = 64, height = 48;
    double fov_deg = 70.0;

    // Signed distance, positive in free space, negative inside matter.
    double sdf(const Vec3& p) const;
    // Smooth procedural surface color, channels strictly inside (0, 1).
    Vec3 color_at(const Vec3& p) const;
    Pose pose_at(int frame) const;
    CameraIntrinsics intrinsics() const;

    static SyntheticScene room_with_sphere();
    static SyntheticScene from_json_file(const std::string& path);
};

// Exact depth by sphere tracing (|sdf| < 1e-6 m at convergence). Returns the
// Euclidean distance along the ray, or 0 on a miss.
double sphere_trace(const SyntheticScene& scene, const Vec3& origin, const Vec3& dir,
                    double max_dist);

// Renders the full sequence (depth stored as z-depth, quantized to the
// 16-bit Replica encoding) and, when out_dir is non-empty, writes it in the
// Replica layout so load_replica round-trips. Throws if the trajectory
// leaves the room interior.
FrameSequence synth_generate(const SyntheticScene& scene, const std::string& out_dir = "");

} // namespace gridslam
