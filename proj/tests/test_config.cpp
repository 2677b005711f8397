#include <doctest.h>

#include "gridslam/run_config.hpp"

using namespace gridslam;

TEST_CASE("empty config carries the published defaults") {
    const RunConfig cfg = parse_config("");
    CHECK(cfg.truncation == 0.06);
    CHECK(cfg.mapping_interval == 4);
    CHECK(cfg.local_window == 20);
    CHECK(cfg.geometry_levels == 16);
    CHECK(cfg.appearance_levels == 16);
    CHECK(cfg.n_stratified == 32);
    CHECK(cfg.n_importance == 10);
    CHECK(cfg.tracking_rays == 2000);
    CHECK(cfg.mapping_rays == 4000);
    CHECK(cfg.tracking_iterations == 8);
    CHECK(cfg.mapping_iterations == 13);
    CHECK(cfg.first_frame_iterations == 200);
    CHECK(cfg.pixel_uncertainty_threshold == 1e-2);
    CHECK(cfg.image_uncertainty_threshold == 1e-3);
    CHECK(cfg.covisibility_threshold == 0.95);
    CHECK(cfg.loop_min_frame_gap == 100);
    CHECK(cfg.covis_pixels == 50);
    CHECK(cfg.covis_samples == 8);
    CHECK(cfg.finest_voxel_size == 0.02);
    CHECK(cfg.edge_crop == 0);
}

TEST_CASE("dataset sections apply their published overrides") {
    SUBCASE("tum") {
        const RunConfig cfg = parse_config("[tum]\n");
        CHECK(cfg.dataset == "tum");
        CHECK(cfg.image_uncertainty_threshold == 2e-3);
        CHECK(cfg.edge_crop == 20);
        CHECK(cfg.tracking_iterations == 20);
        CHECK(cfg.mapping_iterations == 20);
        CHECK(cfg.n_stratified == 48);
        CHECK(cfg.tracking_rays == 4000);
        CHECK(cfg.lr_geometry_grid == 2e-2);
        CHECK(cfg.lr_translation == 1e-2);
        CHECK(cfg.lr_rotation == 5e-3);
    }
    SUBCASE("scannet") {
        const RunConfig cfg = parse_config("dataset = scannet\n");
        CHECK(cfg.mapping_interval == 5);
        CHECK(cfg.edge_crop == 75);
        CHECK(cfg.n_stratified == 48);
        CHECK(cfg.lr_translation == 5e-4);
        CHECK(cfg.lr_rotation == 3e-3);
    }
    SUBCASE("replica appearance grid is deeper") {
        const RunConfig cfg = parse_config("[replica]\n");
        CHECK(cfg.appearance_levels == 19);
        CHECK(cfg.geometry_levels == 16);
    }
    SUBCASE("explicit keys beat the built-in override") {
        const RunConfig cfg = parse_config("dataset = tum\nimage_uncertainty_threshold = 5e-4\n");
        CHECK(cfg.image_uncertainty_threshold == 5e-4);
        CHECK(cfg.edge_crop == 20); // other overrides still apply
    }
    SUBCASE("section keys beat the built-in override") {
        const RunConfig cfg = parse_config("[tum]\nedge_crop = 5\n");
        CHECK(cfg.edge_crop == 5);
        CHECK(cfg.image_uncertainty_threshold == 2e-3);
    }
    SUBCASE("inactive sections are ignored") {
        const RunConfig cfg = parse_config("dataset = replica\n[tum]\nedge_crop = 5\n");
        CHECK(cfg.edge_crop == 0);
        CHECK(cfg.appearance_levels == 19);
    }
}

TEST_CASE("unknown keys and bad values are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config("foo = 1\n"), doctest::Contains("foo"), std::runtime_error);
    CHECK_THROWS_WITH_AS(parse_config("covisibility_threshold = 1.5\n"),
                         doctest::Contains("covisibility_threshold"), std::runtime_error);
    CHECK_THROWS(parse_config("covisibility_threshold = 0\n"));
    CHECK_THROWS(parse_config("truncation = -0.5\n"));
    CHECK_THROWS(parse_config("seed = banana\n"));
    CHECK_THROWS(parse_config("[weird]\n"));
    CHECK_THROWS(parse_config("scene_bounds = 1 2 3\n"));
    CHECK_THROWS(parse_config("dataset = kitti\n"));
}

TEST_CASE("comments and whitespace are tolerated") {
    const RunConfig cfg = parse_config("# a comment\n  truncation = 0.08  # trailing\n\n");
    CHECK(cfg.truncation == 0.08);
}

TEST_CASE("serialize/parse round trip") {
    RunConfig cfg = parse_config("[scannet]\nseed = 42\n");
    cfg.scene_bounds = Aabb{Vec3(-1.5, -1.25, -1.5), Vec3(1.5, 1.25, 1.5)};
    cfg.tracking_lr_decay = 0.85;
    const std::string once = serialize_config(cfg);
    const RunConfig reparsed = parse_config(once);
    CHECK(serialize_config(reparsed) == once);
}
