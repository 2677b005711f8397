#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridslam/geometry.hpp"

namespace gridslam {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Vec3> colors; // optional, per vertex, values in [0, 1]

    bool has_colors() const { return colors.size() == vertices.size(); }
    Vec3 centroid(int tri) const {
        const auto& t = triangles[tri];
        return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
    }
    double area(int tri) const {
        const auto& t = triangles[tri];
        return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
    }
};

// PLY io: ascii or binary little-endian, positions + optional uchar colors
// + faces. Loader accepts both encodings.
void save_ply(const TriangleMesh& mesh, const std::string& path, bool binary = true);
TriangleMesh load_ply(const std::string& path);

} // namespace gridslam
