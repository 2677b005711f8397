#include "gridslam/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "gridslam/dataset_io.hpp"
#include "gridslam/parallel.hpp"
#include "image_io.hpp"

namespace gridslam {
namespace {

// Signed distance to a solid box, negative inside.
double box_sdf(const Vec3& p, const Vec3& center, const Vec3& half) {
    const Vec3 q = (p - center).cwiseAbs() - half;
    const Vec3 outside = q.cwiseMax(0.0);
    return outside.norm() + std::min(q.maxCoeff(), 0.0);
}

double primitive_sdf(const SdfPrimitive& prim, const Vec3& p) {
    switch (prim.type) {
        case SdfPrimitive::Type::sphere:
            return (p - prim.center).norm() - prim.radius;
        case SdfPrimitive::Type::box:
            return box_sdf(p, prim.center, prim.half_extent);
    }
    return 0.0;
}

} // namespace

double SyntheticScene::sdf(const Vec3& p) const {
    // Room walls enclose the air region: interior of the box is free space.
    double d = -box_sdf(p, room.center(), 0.5 * room.extent());
    for (const SdfPrimitive& prim : primitives)
        if (!prim.subtract) d = std::min(d, primitive_sdf(prim, p));
    for (const SdfPrimitive& prim : primitives)
        if (prim.subtract) d = std::max(d, -primitive_sdf(prim, p));
    return d;
}

Vec3 SyntheticScene::color_at(const Vec3& p) const {
    const double r = 0.5 + 0.35 * std::sin(1.3 * p.x() + 0.7 * p.y() + 0.5);
    const double g = 0.5 + 0.35 * std::sin(1.1 * p.y() + 0.9 * p.z() + 1.7);
    const double b = 0.5 + 0.35 * std::sin(1.5 * p.z() + 0.8 * p.x() + 3.1);
    return Vec3(r, g, b);
}

Pose SyntheticScene::pose_at(int frame) const {
    double t = frames > 1 ? double(frame) / double(frames) : 0.0;
    if (angle_ramp) t = t * t;
    const double theta = (start_deg + sweep_deg * t) * M_PI / 180.0;
    const Vec3 eye = orbit_center + Vec3(orbit_radius * std::cos(theta), orbit_height,
                                         orbit_radius * std::sin(theta));
    return look_at(eye, look_target, Vec3(0, 1, 0));
}

CameraIntrinsics SyntheticScene::intrinsics() const {
    CameraIntrinsics intr;
    intr.width = width;
    intr.height = height;
    intr.fx = (width / 2.0) / std::tan(0.5 * fov_deg * M_PI / 180.0);
    intr.fy = intr.fx;
    intr.cx = (width - 1) / 2.0;
    intr.cy = (height - 1) / 2.0;
    return intr;
}

SyntheticScene SyntheticScene::room_with_sphere() {
    SyntheticScene s;
    s.room = Aabb{Vec3(-1.5, -1.2, -1.5), Vec3(1.5, 1.2, 1.5)};
    SdfPrimitive sphere;
    sphere.type = SdfPrimitive::Type::sphere;
    sphere.center = Vec3(0.0, -0.35, 0.0);
    sphere.radius = 0.5;
    s.primitives.push_back(sphere);
    s.orbit_center = Vec3(0, 0.25, 0);
    s.orbit_radius = 0.95;
    s.orbit_height = 0.0;
    s.look_target = Vec3(0.0, -0.1, 0.0);
    s.frames = 20;
    s.width = 64;
    s.height = 48;
    s.fov_deg = 70.0;
    return s;
}

SyntheticScene SyntheticScene::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("scene spec: cannot open " + path);
    nlohmann::json j;
    in >> j;
    SyntheticScene s;
    auto vec3 = [](const nlohmann::json& a) { return Vec3(a.at(0), a.at(1), a.at(2)); };
    if (j.contains("room")) {
        s.room.min = vec3(j["room"].at("min"));
        s.room.max = vec3(j["room"].at("max"));
    }
    if (j.contains("primitives")) {
        for (const auto& pj : j["primitives"]) {
            SdfPrimitive p;
            const std::string type = pj.at("type");
            if (type == "sphere") {
                p.type = SdfPrimitive::Type::sphere;
                p.radius = pj.at("radius");
            } else if (type == "box") {
                p.type = SdfPrimitive::Type::box;
                p.half_extent = vec3(pj.at("half_extent"));
            } else {
                throw std::runtime_error("scene spec: unknown primitive type '" + type + "'");
            }
            p.center = vec3(pj.at("center"));
            p.subtract = pj.value("op", "union") == std::string("subtract");
            s.primitives.push_back(p);
        }
    }
    if (j.contains("trajectory")) {
        const auto& t = j["trajectory"];
        if (t.contains("center")) s.orbit_center = vec3(t["center"]);
        s.orbit_radius = t.value("radius", s.orbit_radius);
        s.orbit_height = t.value("height", s.orbit_height);
        if (t.contains("target")) s.look_target = vec3(t["target"]);
        s.start_deg = t.value("start_deg", s.start_deg);
        s.sweep_deg = t.value("sweep_deg", s.sweep_deg);
        s.angle_ramp = t.value("angle_ramp", s.angle_ramp);
    }
    s.frames = j.value("frames", s.frames);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.fov_deg = j.value("fov_deg", s.fov_deg);
    return s;
}

double sphere_trace(const SyntheticScene& scene, const Vec3& origin, const Vec3& dir,
                    double max_dist) {
    double t = 0.0;
    for (int it = 0; it < 512; ++it) {
        const double d = scene.sdf(origin + t * dir);
        if (std::abs(d) < 1e-6) return t;
        t += d;
        if (t < 0.0 || t > max_dist) return 0.0;
    }
    return 0.0;
}

FrameSequence synth_generate(const SyntheticScene& scene, const std::string& out_dir) {
    FrameSequence seq;
    seq.dataset_tag = "synthetic";
    seq.intrinsics = scene.intrinsics();
    const double max_dist = scene.room.extent().norm() * 1.5;

    for (int f = 0; f < scene.frames; ++f) {
        const Pose pose = scene.pose_at(f);
        if (scene.sdf(pose.translation) <= 0.02)
            throw std::runtime_error("synthetic: trajectory leaves the room interior at frame " +
                                     std::to_string(f));
        Frame frame;
        frame.timestamp = double(f);
        frame.has_gt_pose = true;
        frame.gt_pose = pose;
        frame.color = Image::create(scene.width, scene.height, 3);
        frame.depth = Image::create(scene.width, scene.height, 1);
        parallel_for(size_t(scene.height), [&](size_t yy) {
            const int y = int(yy);
            for (int x = 0; x < scene.width; ++x) {
                const Vec3 dir_cam = seq.intrinsics.pixel_dir(x, y);
                const double dir_norm = dir_cam.norm();
                const Vec3 dir = pose.rotate(dir_cam).normalized();
                const double t = sphere_trace(scene, pose.translation, dir, max_dist);
                if (t > 0.0) {
                    const Vec3 hit = pose.translation + t * dir;
                    const Vec3 c = scene.color_at(hit);
                    frame.color.at(x, y, 0) = c.x();
                    frame.color.at(x, y, 1) = c.y();
                    frame.color.at(x, y, 2) = c.z();
                    // Stored depth is z-depth, as in the real datasets.
                    frame.depth.at(x, y) =
                        detail::quantize_depth(t / dir_norm, kReplicaDepthScale);
                } else {
                    frame.depth.at(x, y) = 0.0;
                }
            }
        });
        seq.frames.push_back(std::move(frame));
    }
    if (!out_dir.empty()) write_replica(seq, out_dir);
    return seq;
}

} // namespace gridslam
