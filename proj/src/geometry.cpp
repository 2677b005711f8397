#include "gridslam/geometry.hpp"

#include <cmath>

namespace gridslam {

std::optional<std::pair<double, double>> intersect_aabb(const Vec3& origin, const Vec3& dir,
                                                        const Aabb& box) {
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dir[a]) < 1e-15) {
            if (origin[a] < box.min[a] || origin[a] > box.max[a]) return std::nullopt;
            continue;
        }
        double ta = (box.min[a] - origin[a]) / dir[a];
        double tb = (box.max[a] - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    if (t1 <= t0) return std::nullopt;
    return std::make_pair(t0, t1);
}

Quat exp_quat(const Vec3& omega) {
    const double theta = omega.norm();
    if (theta < 1e-12) {
        Quat q(1.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z());
        q.normalize();
        return q;
    }
    const Vec3 axis = omega / theta;
    return Quat(Eigen::AngleAxisd(theta, axis));
}

void Pose::apply_increment(const Vec3& rot_delta, const Vec3& trans_delta) {
    rotation = (exp_quat(rot_delta) * rotation).normalized();
    translation += trans_delta;
}

Mat4 Pose::matrix() const {
    Mat4 m = Mat4::Identity();
    m.block<3, 3>(0, 0) = rotation.toRotationMatrix();
    m.block<3, 1>(0, 3) = translation;
    return m;
}

Pose Pose::from_matrix(const Mat4& m) {
    Pose p;
    p.rotation = Quat(Mat3(m.block<3, 3>(0, 0))).normalized();
    p.translation = m.block<3, 1>(0, 3);
    return p;
}

double Pose::rotation_angle(const Pose& a, const Pose& b) {
    const Quat d = a.rotation.conjugate() * b.rotation;
    const double w = std::min(1.0, std::abs(d.w()));
    return 2.0 * std::acos(w);
}

Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
    const Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(up);
    if (x.norm() < 1e-9) x = z.cross(Vec3(1, 0, 0));
    x.normalize();
    const Vec3 y = z.cross(x);
    Mat3 r;
    r.col(0) = x;
    r.col(1) = y;
    r.col(2) = z;
    Pose p;
    p.rotation = Quat(r).normalized();
    p.translation = eye;
    return p;
}

} // namespace gridslam
