#include "gridslam/marching_cubes.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gridslam/parallel.hpp"
#include "mc_tables.hpp"

namespace gridslam {
namespace {

// Corner layout matching the tables: y is the "up" axis pair (0-3 bottom,
// 4-7 top), x-z wind around.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1},
                               {0, 1, 0}, {1, 1, 0}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeVerts[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                   {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

struct LatticeDims {
    int nx, ny, nz; // cells per axis
};

// Unique key of a lattice edge: anchor vertex plus axis.
uint64_t edge_key(int x, int y, int z, int axis, const LatticeDims& d) {
    const uint64_t vid =
        (uint64_t(z) * (d.ny + 1) + uint64_t(y)) * (d.nx + 1) + uint64_t(x);
    return vid * 3 + uint64_t(axis);
}

} // namespace

TriangleMesh marching_cubes(const std::function<double(const Vec3&)>& sdf, const Aabb& bounds,
                            double cell_size, size_t max_lattice_bytes) {
    if (cell_size <= 0.0) throw std::runtime_error("marching cubes: cell_size must be > 0");
    LatticeDims d;
    d.nx = std::max(1, int(std::ceil(bounds.extent().x() / cell_size)));
    d.ny = std::max(1, int(std::ceil(bounds.extent().y() / cell_size)));
    d.nz = std::max(1, int(std::ceil(bounds.extent().z() / cell_size)));
    const size_t plane_values = size_t(d.nx + 1) * size_t(d.ny + 1);
    if (plane_values * size_t(d.nz + 1) * sizeof(double) > max_lattice_bytes)
        throw std::runtime_error(
            "marching cubes: lattice exceeds the memory budget, use a larger cell size");

    auto vertex_pos = [&](int x, int y, int z) {
        return Vec3(bounds.min.x() + x * cell_size, bounds.min.y() + y * cell_size,
                    bounds.min.z() + z * cell_size);
    };

    // Two z-planes of samples at a time; extraction walks slab by slab.
    std::vector<double> plane0(plane_values), plane1(plane_values);
    auto fill_plane = [&](int z, std::vector<double>& plane) {
        parallel_for(size_t(d.ny + 1), [&](size_t yy) {
            const int y = int(yy);
            for (int x = 0; x <= d.nx; ++x)
                plane[size_t(y) * (d.nx + 1) + x] = sdf(vertex_pos(x, y, z));
        });
    };
    fill_plane(0, plane0);

    TriangleMesh mesh;
    std::unordered_map<uint64_t, int> edge_vertex;
    auto corner_value = [&](const std::vector<double>* planes[2], int x, int y, int dz) {
        return (*planes[dz])[size_t(y) * (d.nx + 1) + x];
    };

    for (int z = 0; z < d.nz; ++z) {
        fill_plane(z + 1, plane1);
        const std::vector<double>* planes[2] = {&plane0, &plane1};
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                double value[8];
                int cube = 0;
                for (int c = 0; c < 8; ++c) {
                    value[c] = corner_value(planes, x + kCorner[c][0], y + kCorner[c][1],
                                            kCorner[c][2]);
                    if (value[c] < 0.0) cube |= 1 << c;
                }
                const int edges = mc_tables::kEdgeTable[cube];
                if (edges == 0) continue;

                int edge_to_vertex[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(edges & (1 << e))) continue;
                    const int c0 = kEdgeVerts[e][0];
                    const int c1 = kEdgeVerts[e][1];
                    const int v0[3] = {x + kCorner[c0][0], y + kCorner[c0][1], z + kCorner[c0][2]};
                    const int v1[3] = {x + kCorner[c1][0], y + kCorner[c1][1], z + kCorner[c1][2]};
                    int axis = 0;
                    for (int a = 0; a < 3; ++a)
                        if (v0[a] != v1[a]) axis = a;
                    const int ax = std::min(v0[0], v1[0]);
                    const int ay = std::min(v0[1], v1[1]);
                    const int az = std::min(v0[2], v1[2]);
                    const uint64_t key = edge_key(ax, ay, az, axis, d);
                    auto it = edge_vertex.find(key);
                    if (it == edge_vertex.end()) {
                        const double f0 = value[c0];
                        const double f1 = value[c1];
                        double t = f0 / (f0 - f1); // f1 != f0 when the edge is crossed
                        t = std::clamp(t, 0.0, 1.0);
                        const Vec3 p0 = vertex_pos(v0[0], v0[1], v0[2]);
                        const Vec3 p1 = vertex_pos(v1[0], v1[1], v1[2]);
                        it = edge_vertex.emplace(key, int(mesh.vertices.size())).first;
                        mesh.vertices.push_back(p0 + t * (p1 - p0));
                    }
                    edge_to_vertex[e] = it->second;
                }

                const int* tri = mc_tables::kTriTable[cube];
                for (int i = 0; tri[i] != -1; i += 3) {
                    const std::array<int, 3> t = {edge_to_vertex[tri[i]], edge_to_vertex[tri[i + 1]],
                                                  edge_to_vertex[tri[i + 2]]};
                    mesh.triangles.push_back(t);
                }
            }
        }
        std::swap(plane0, plane1);
    }

    // Drop degenerate triangles.
    std::vector<std::array<int, 3>> kept;
    kept.reserve(mesh.triangles.size());
    for (size_t i = 0; i < mesh.triangles.size(); ++i)
        if (mesh.area(int(i)) > 1e-12) kept.push_back(mesh.triangles[i]);
    mesh.triangles = std::move(kept);
    return mesh;
}

TriangleMesh extract_mesh(const SceneField& field, const Aabb& bounds, double cell_size) {
    TriangleMesh mesh = marching_cubes([&field](const Vec3& p) { return field.query_sdf(p); },
                                       bounds, cell_size);
    mesh.colors.resize(mesh.vertices.size());
    parallel_for(mesh.vertices.size(),
                 [&](size_t i) { mesh.colors[i] = field.query_color(mesh.vertices[i]); });
    return mesh;
}

} // namespace gridslam
