#include <doctest.h>

#include <filesystem>

#include "gridslam/marching_cubes.hpp"
#include "gridslam/mesh_culling.hpp"

using namespace gridslam;

TEST_CASE("constant positive field produces no surface") {
    const Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    const auto mesh = marching_cubes([](const Vec3&) { return 0.5; }, box, 0.1);
    CHECK(mesh.triangles.empty());
    CHECK(mesh.vertices.empty());
}

TEST_CASE("analytic sphere: vertices within one cell of the radius") {
    const Aabb box{Vec3(-0.8, -0.8, -0.8), Vec3(0.8, 0.8, 0.8)};
    const double cell = 0.01;
    const auto mesh = marching_cubes([](const Vec3& p) { return p.norm() - 0.5; }, box, cell);
    REQUIRE(!mesh.vertices.empty());
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.norm() - 0.5) <= cell);
}

TEST_CASE("analytic plane: linear interpolation is exact") {
    const Aabb box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    const double offset = 0.1234;
    const auto mesh =
        marching_cubes([offset](const Vec3& p) { return p.x() - offset; }, box, 0.07);
    REQUIRE(!mesh.vertices.empty());
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.x() - offset) < 1e-6);
}

TEST_CASE("emitted vertices sit on interpolated zero crossings") {
    const Aabb box{Vec3(-0.6, -0.6, -0.6), Vec3(0.6, 0.6, 0.6)};
    const double cell = 0.05;
    const auto sdf = [](const Vec3& p) { return p.norm() - 0.4; };
    const auto mesh = marching_cubes(sdf, box, cell);
    REQUIRE(!mesh.vertices.empty());
    for (const Vec3& v : mesh.vertices) {
        // Locate the lattice edge containing the vertex: exactly one
        // coordinate is off-lattice.
        Vec3 rel = (v - box.min) / cell;
        int off_axis = -1;
        Eigen::Vector3i base;
        for (int a = 0; a < 3; ++a) {
            const double r = rel[a];
            const double nearest = std::round(r);
            if (std::abs(r - nearest) < 1e-9) {
                base[a] = int(nearest);
            } else {
                off_axis = a;
                base[a] = int(std::floor(r));
            }
        }
        if (off_axis < 0) {
            // Vertex sits exactly on a lattice corner whose sample is zero.
            CHECK(std::abs(sdf(v)) < 1e-12);
            continue;
        }
        Vec3 p0 = box.min + cell * base.cast<double>();
        Vec3 p1 = p0;
        p1[off_axis] += cell;
        const double f0 = sdf(p0);
        const double f1 = sdf(p1);
        const double t = (v[off_axis] - p0[off_axis]) / cell;
        CHECK(std::abs((1.0 - t) * f0 + t * f1) < 1e-9);
    }
}

TEST_CASE("no degenerate triangles and deterministic extraction") {
    const Aabb box{Vec3(-0.6, -0.6, -0.6), Vec3(0.6, 0.6, 0.6)};
    const auto sdf = [](const Vec3& p) { return p.cwiseAbs().maxCoeff() - 0.35; };
    const auto a = marching_cubes(sdf, box, 0.04);
    const auto b = marching_cubes(sdf, box, 0.04);
    REQUIRE(!a.triangles.empty());
    for (size_t t = 0; t < a.triangles.size(); ++t) CHECK(a.area(int(t)) > 1e-12);
    REQUIRE(a.vertices.size() == b.vertices.size());
    REQUIRE(a.triangles.size() == b.triangles.size());
    for (size_t i = 0; i < a.vertices.size(); ++i) CHECK(a.vertices[i] == b.vertices[i]);
    for (size_t i = 0; i < a.triangles.size(); ++i) CHECK(a.triangles[i] == b.triangles[i]);
}

TEST_CASE("memory budget guards absurd lattices") {
    const Aabb box{Vec3(-10, -10, -10), Vec3(10, 10, 10)};
    CHECK_THROWS_WITH_AS(
        marching_cubes([](const Vec3&) { return 1.0; }, box, 1e-4, size_t(1) << 20),
        doctest::Contains("cell size"), std::runtime_error);
}

TEST_CASE("frustum culling keeps exactly the visible triangles") {
    const Aabb box{Vec3(-0.8, -0.8, -0.8), Vec3(0.8, 0.8, 0.8)};
    const auto mesh = marching_cubes([](const Vec3& p) { return p.norm() - 0.5; }, box, 0.05);
    REQUIRE(!mesh.triangles.empty());

    CameraIntrinsics intr{60.0, 60.0, 31.5, 23.5, 64, 48, 0};
    Pose cam; // close enough that the sphere spills out of the frustum
    cam.translation = Vec3(0, 0, -0.8);
    const std::vector<Pose> poses{cam};
    const auto culled = cull_mesh(mesh, poses, intr);
    CHECK(!culled.triangles.empty());
    CHECK(culled.triangles.size() < mesh.triangles.size());

    // Brute-force oracle over the original triangles.
    const Pose inv = cam.inverse();
    size_t expected = 0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec3 c = inv.apply(mesh.centroid(int(t)));
        if (c.z() > 0) {
            const double u = intr.fx * c.x() / c.z() + intr.cx;
            const double v = intr.fy * c.y() / c.z() + intr.cy;
            if (u >= 0 && u <= 63 && v >= 0 && v <= 47) ++expected;
        }
    }
    CHECK(culled.triangles.size() == expected);

    // A camera looking away keeps nothing; everything is behind it.
    Pose away;
    away.translation = Vec3(0, 0, -2.0);
    away.rotation = Quat(Eigen::AngleAxisd(M_PI, Vec3(0, 1, 0)));
    const std::vector<Pose> away_poses{away};
    CHECK(cull_mesh(mesh, away_poses, intr).triangles.empty());
}

TEST_CASE("ply round trip, ascii and binary") {
    namespace fs = std::filesystem;
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    mesh.colors = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0.5, 0.5, 0.5)};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    for (const bool binary : {true, false}) {
        const fs::path path = fs::temp_directory_path() /
                              (binary ? "gridslam_mesh_b.ply" : "gridslam_mesh_a.ply");
        save_ply(mesh, path.string(), binary);
        const TriangleMesh loaded = load_ply(path.string());
        REQUIRE(loaded.vertices.size() == 4);
        REQUIRE(loaded.triangles.size() == 2);
        CHECK(loaded.has_colors());
        for (int i = 0; i < 4; ++i)
            CHECK((loaded.vertices[i] - mesh.vertices[i]).norm() < 1e-6);
        CHECK(loaded.triangles[1] == mesh.triangles[1]);
        fs::remove(path);
    }
}
