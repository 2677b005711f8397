#pragma once

#include <functional>

#include "gridslam/scene_field.hpp"
#include "gridslam/triangle_mesh.hpp"

namespace gridslam {

// Zero isosurface of a scalar field sampled on a regular lattice over
// bounds, with linear interpolation along cell edges and the standard
// 256-case table. Vertices on shared edges are deduplicated; degenerate
// triangles (area <= 1e-12) are dropped. Deterministic for a fixed field.
TriangleMesh marching_cubes(const std::function<double(const Vec3&)>& sdf, const Aabb& bounds,
                            double cell_size, size_t max_lattice_bytes = size_t(2) << 30);

// Mesh of the learned geometry field at cell_size resolution, colored by the
// appearance field.
TriangleMesh extract_mesh(const SceneField& field, const Aabb& bounds, double cell_size);

} // namespace gridslam
