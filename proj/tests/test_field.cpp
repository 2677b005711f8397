#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gridslam/scene_field.hpp"
#include "oracles.hpp"

using namespace gridslam;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.scene_bounds = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
    cfg.geometry_levels = 4;
    cfg.appearance_levels = 4;
    cfg.table_size_log2 = 10;
    cfg.base_resolution = 4;
    cfg.finest_voxel_size = 0.1;
    cfg.decoder_hidden = 16;
    return cfg;
}

} // namespace

TEST_CASE("grid resolutions: finest voxel size fixes the last level") {
    RunConfig cfg;
    cfg.scene_bounds = Aabb{Vec3(-2, -2, -2), Vec3(2, 2, 2)}; // 4 m cube
    Rng rng(0);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    CHECK(f.geometry_grid().levels() == 16);
    CHECK(f.appearance_grid().levels() == 16);
    CHECK(f.geometry_grid().resolution(15) == 200); // 4 m / 0.02 m
    for (int l = 1; l < 16; ++l)
        CHECK(f.geometry_grid().resolution(l) > f.geometry_grid().resolution(l - 1));
}

TEST_CASE("degenerate bounds rejected") {
    RunConfig cfg;
    cfg.scene_bounds = Aabb{Vec3(0, 0, 0), Vec3(1, 0, 1)};
    Rng rng(0);
    CHECK_THROWS(SceneField::init(cfg, cfg.scene_bounds, rng));
}

TEST_CASE("fresh field decodes near the activation midpoints") {
    RunConfig cfg = small_config();
    Rng rng(7);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    Rng points(3);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(points.uniform(-1, 1), points.uniform(-1, 1), points.uniform(-1, 1));
        CHECK(std::abs(f.query_sdf(p)) < 0.01);
        const Vec3 c = f.query_color(p);
        for (int k = 0; k < 3; ++k) CHECK(c[k] == doctest::Approx(0.5).epsilon(0.02));
    }
}

TEST_CASE("query outputs stay strictly inside the activation ranges") {
    RunConfig cfg = small_config();
    Rng rng(11);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    for (double& p : f.geometry_grid().params()) p = rng.uniform(-5, 5);
    for (double& p : f.appearance_grid().params()) p = rng.uniform(-5, 5);
    Rng points(5);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p(points.uniform(-1.2, 1.2), points.uniform(-1.2, 1.2), points.uniform(-1.2, 1.2));
        const double sdf = f.query_sdf(p);
        CHECK(sdf > -1.0);
        CHECK(sdf < 1.0);
        const Vec3 c = f.query_color(p);
        for (int k = 0; k < 3; ++k) {
            CHECK(c[k] > 0.0);
            CHECK(c[k] < 1.0);
        }
    }
}

TEST_CASE("geometry and appearance paths share no parameters") {
    RunConfig cfg = small_config();
    Rng rng(13);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    const Vec3 p(0.3, -0.2, 0.55);
    const double sdf_before = f.query_sdf(p);

    for (double& w : f.appearance_grid().params()) w += 0.37;
    for (double& w : f.appearance_decoder().params()) w += 0.11;
    CHECK(f.query_sdf(p) == sdf_before); // bitwise

    const Vec3 color_before = f.query_color(p);
    for (double& w : f.geometry_grid().params()) w -= 1.5;
    for (double& w : f.geometry_decoder().params()) w += 0.25;
    const Vec3 color_after = f.query_color(p);
    CHECK(color_after.x() == color_before.x());
    CHECK(color_after.y() == color_before.y());
    CHECK(color_after.z() == color_before.z());
}

TEST_CASE("encode matches the brute-force trilinear oracle") {
    RunConfig cfg = small_config();
    cfg.geometry_levels = 5;
    cfg.table_size_log2 = 8; // force hashing on the finer levels
    Rng rng(17);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    HashGrid& grid = f.geometry_grid();
    for (double& p : grid.params()) p = rng.uniform(-1, 1);

    bool any_hashed = false;
    for (int l = 0; l < grid.levels(); ++l) {
        const size_t verts = size_t(grid.resolution(l) + 1);
        if (verts * verts * verts > (size_t(1) << 8)) any_hashed = true;
    }
    CHECK(any_hashed);

    std::vector<double> feat(grid.feature_dim());
    Rng points(23);
    for (int i = 0; i < 300; ++i) {
        const Vec3 p(points.uniform(-1, 1), points.uniform(-1, 1), points.uniform(-1, 1));
        grid.encode(p, feat.data());
        const auto ref = oracles::encode_reference(grid, p);
        for (int k = 0; k < grid.feature_dim(); ++k)
            CHECK(std::abs(feat[k] - ref[k]) <= 1e-12);
    }
    // Out-of-bounds points clamp instead of erroring.
    const Vec3 outside(5.0, 0.0, 0.0);
    CHECK(grid.encode(outside, feat.data()));
    const auto ref = oracles::encode_reference(grid, outside);
    for (int k = 0; k < grid.feature_dim(); ++k) CHECK(std::abs(feat[k] - ref[k]) <= 1e-12);
}

TEST_CASE("encode is exact at lattice corners and edge midpoints") {
    HashGridConfig gcfg{1, 2, 12, 4, 0.5}; // single dense level, res 4
    const Aabb bounds{Vec3(0, 0, 0), Vec3(2, 2, 2)};
    HashGrid grid(gcfg, bounds);
    Rng rng(29);
    grid.init_features(rng, 1.0);
    CHECK(grid.resolution(0) == 4);

    auto corner_feature = [&](int x, int y, int z, int f) {
        const size_t stride = 5;
        return grid.params()[(size_t(x) + y * stride + z * stride * stride) * 2 + f];
    };
    double feat[2];
    grid.encode(Vec3(0.5, 1.0, 1.5), feat); // lattice corner (1, 2, 3)
    CHECK(feat[0] == doctest::Approx(corner_feature(1, 2, 3, 0)).epsilon(1e-14));
    CHECK(feat[1] == doctest::Approx(corner_feature(1, 2, 3, 1)).epsilon(1e-14));

    grid.encode(Vec3(0.75, 1.0, 1.5), feat); // midpoint of x-edge (1,2,3)-(2,2,3)
    CHECK(feat[0] ==
          doctest::Approx(0.5 * (corner_feature(1, 2, 3, 0) + corner_feature(2, 2, 3, 0)))
              .epsilon(1e-14));
}

TEST_CASE("encode_backward feature gradient equals the trilinear weights") {
    HashGridConfig gcfg{1, 1, 12, 4, 0.5};
    const Aabb bounds{Vec3(0, 0, 0), Vec3(1, 1, 1)};
    HashGrid grid(gcfg, bounds);
    Rng rng(31);
    grid.init_features(rng, 1.0);

    const Vec3 p(0.33, 0.61, 0.08);
    std::vector<double> grad(grid.param_count(), 0.0);
    const double up = 1.0;
    grid.encode_backward(p, &up, grad, nullptr);
    double sum = 0.0;
    int touched = 0;
    for (const double g : grad) {
        if (g != 0.0) ++touched;
        CHECK(g >= 0.0);
        sum += g;
    }
    CHECK(touched == 8);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12)); // partition of unity

    // Feature-gradient finite difference.
    std::vector<double> feat(1);
    for (size_t k = 0; k < grid.param_count(); ++k) {
        if (grad[k] == 0.0) continue;
        const double h = 1e-6;
        const double save = grid.params()[k];
        grid.params()[k] = save + h;
        grid.encode(p, feat.data());
        const double fp = feat[0];
        grid.params()[k] = save - h;
        grid.encode(p, feat.data());
        const double fm = feat[0];
        grid.params()[k] = save;
        const double fd = (fp - fm) / (2 * h);
        CHECK(std::abs(fd - grad[k]) / std::abs(fd) < 1e-6);
    }
}

TEST_CASE("checkpoint round-trips bitwise") {
    namespace fs = std::filesystem;
    RunConfig cfg = small_config();
    Rng rng(37);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    for (double& p : f.geometry_grid().params()) p = rng.uniform(-1, 1);
    f.set_alpha(0.0421);

    const fs::path a = fs::temp_directory_path() / "gridslam_ckpt_a.bin";
    const fs::path b = fs::temp_directory_path() / "gridslam_ckpt_b.bin";
    f.save(a.string());
    SceneField g = SceneField::load(a.string());
    CHECK(g.param_digest() == f.param_digest());
    CHECK(g.alpha() == f.alpha());
    g.save(b.string());

    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ca == cb);
    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("alpha stays positive under projection") {
    RunConfig cfg = small_config();
    Rng rng(41);
    SceneField f = SceneField::init(cfg, cfg.scene_bounds, rng);
    f.set_alpha(-3.0);
    CHECK(f.alpha() == 1e-4);
    f.set_alpha(0.2);
    CHECK(f.alpha() == 0.2);
}
