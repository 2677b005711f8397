#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>

namespace gridslam {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

// Axis-aligned box in meters.
struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    Vec3 extent() const { return max - min; }
    Vec3 center() const { return 0.5 * (min + max); }
    double volume() const { return extent().prod(); }
    bool contains(const Vec3& p) const {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
    Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }

    // Smallest cube with the same center that covers this box.
    Aabb bounding_cube() const {
        const double side = extent().maxCoeff();
        const Vec3 c = center();
        return {c - Vec3::Constant(0.5 * side), c + Vec3::Constant(0.5 * side)};
    }
};

// Slab intersection of a ray with a box. Returns [t_near, t_far] with
// t_far > t_near, or nothing on a miss.
std::optional<std::pair<double, double>> intersect_aabb(const Vec3& origin, const Vec3& dir,
                                                        const Aabb& box);

// Camera-to-world rigid transform. Rotation kept as a unit quaternion and
// renormalized after every update.
struct Pose {
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p_cam) const { return rotation * p_cam + translation; }
    Vec3 rotate(const Vec3& v) const { return rotation * v; }

    Pose inverse() const {
        const Quat qi = rotation.conjugate();
        return {qi, -(qi * translation)};
    }
    // this ∘ other (apply other first, then this).
    Pose compose(const Pose& other) const {
        Pose out;
        out.rotation = (rotation * other.rotation).normalized();
        out.translation = rotation * other.translation + translation;
        return out;
    }

    // World-frame increment: rotation <- exp([rot_delta]x) * rotation,
    // translation <- translation + trans_delta. Matches the left-perturbation
    // convention used by the pose derivatives.
    void apply_increment(const Vec3& rot_delta, const Vec3& trans_delta);

    Mat4 matrix() const;
    static Pose from_matrix(const Mat4& m);

    // Rotation angle between two poses, radians.
    static double rotation_angle(const Pose& a, const Pose& b);
};

// exp of a rotation vector (axis-angle) as a quaternion.
Quat exp_quat(const Vec3& omega);

// Right-handed look-at with camera z forward, y down when up = +world up.
Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

} // namespace gridslam
