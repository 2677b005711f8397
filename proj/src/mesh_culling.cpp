#include "gridslam/mesh_culling.hpp"

#include <vector>

#include "gridslam/parallel.hpp"

namespace gridslam {

TriangleMesh cull_mesh(const TriangleMesh& mesh, std::span<const Pose> poses,
                       const CameraIntrinsics& intrinsics) {
    std::vector<Pose> inverses;
    inverses.reserve(poses.size());
    for (const Pose& p : poses) inverses.push_back(p.inverse());

    std::vector<uint8_t> keep(mesh.triangles.size(), 0);
    parallel_for(mesh.triangles.size(), [&](size_t t) {
        const Vec3 c = mesh.centroid(int(t));
        for (const Pose& inv : inverses) {
            const Vec3 cam = inv.apply(c);
            if (cam.z() <= 0.0) continue;
            const Vec3 uvz = intrinsics.project(cam);
            if (intrinsics.inside_crop(uvz.x(), uvz.y())) {
                keep[t] = 1;
                break;
            }
        }
    });

    TriangleMesh out;
    std::vector<int> remap(mesh.vertices.size(), -1);
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (!keep[t]) continue;
        std::array<int, 3> tri;
        for (int k = 0; k < 3; ++k) {
            const int v = mesh.triangles[t][k];
            if (remap[v] < 0) {
                remap[v] = int(out.vertices.size());
                out.vertices.push_back(mesh.vertices[v]);
                if (mesh.has_colors()) out.colors.push_back(mesh.colors[v]);
            }
            tri[k] = remap[v];
        }
        out.triangles.push_back(tri);
    }
    return out;
}

} // namespace gridslam
