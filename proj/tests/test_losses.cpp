#include <doctest.h>

#include "gridslam/losses.hpp"

using namespace gridslam;

namespace {

// Record with n rays whose loss terms are injected directly; the rays()
// themselves are placeholders since aggregate_loss only reads masks and
// normalizers.
BatchRecord make_record(int n, OptimMode mode, const LossWeights& w) {
    BatchRecord rec;
    rec.rays.resize(n);
    rec.cf.assign(n, 1);
    rec.mode = mode;
    rec.weights = w;
    rec.truncation = 0.06;
    rec.m_star_rgb = n;
    rec.m_star_depth = n;
    return rec;
}

} // namespace

TEST_CASE("confidence mask is inclusive at the threshold") {
    CHECK(confidence_mask(0.0, 1e-2));
    CHECK(confidence_mask(1e-2, 1e-2)); // <= keeps the boundary pixel
    CHECK(!confidence_mask(1e-2 + 1e-12, 1e-2));
    RunConfig cfg;
    CHECK(cfg.pixel_uncertainty_threshold == 1e-2);
}

TEST_CASE("sample classification bands") {
    const double tau = 0.06;
    CHECK(classify_sample(0.0, tau) == SampleClass::center);
    CHECK(classify_sample(0.024, tau) == SampleClass::center);  // 0.4 tau inclusive
    CHECK(classify_sample(-0.024, tau) == SampleClass::center);
    CHECK(classify_sample(0.03, tau) == SampleClass::tail);
    CHECK(classify_sample(-0.05, tau) == SampleClass::tail);
    CHECK(classify_sample(0.06, tau) == SampleClass::free_space); // |b| >= tau
    CHECK(classify_sample(1.5, tau) == SampleClass::free_space);
}

TEST_CASE("per-ray loss terms, hand evaluated") {
    RaySpec spec;
    spec.sensor_color = Vec3(0.2, 0.2, 0.2);
    spec.sensor_depth = 2.0;
    spec.distances = {2.01}; // b = -0.01, center band
    RayEval eval;
    eval.sdf = {0.0};
    eval.comp.color = Vec3(0.3, 0.3, 0.3); // residual 0.1 per channel
    eval.comp.depth = 2.0;

    const RayLossTerms t = ray_loss_terms(spec, eval, 0.06);
    CHECK(t.rgb == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(t.n_center == 1);
    // phi * tau - b = 0 * 0.06 - (-0.01) = 0.01 -> squared 1e-4
    CHECK(t.center == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(t.depth == doctest::Approx(0.0));
}

TEST_CASE("single center sample with residual 0.01 gives 1e-4") {
    BatchRecord rec = make_record(1, OptimMode::mapping, LossWeights{0, 0, 1, 0, 0});
    RayLossTerms t;
    t.valid_depth = true;
    t.n_center = 1;
    t.center = 1e-4;
    const std::vector<RayLossTerms> terms{t};
    const LossBreakdown out = aggregate_loss(rec, terms);
    CHECK(out.sdf_center == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("perfect predictions give zero loss") {
    BatchRecord rec = make_record(3, OptimMode::tracking, RunConfig{}.tracking_weights);
    const std::vector<RayLossTerms> terms(3, [] {
        RayLossTerms t;
        t.valid_depth = true;
        return t;
    }());
    const LossBreakdown out = aggregate_loss(rec, terms);
    CHECK(out.total == 0.0);
}

TEST_CASE("unit component losses with mapping weights sum to 220.1") {
    BatchRecord rec = make_record(1, OptimMode::mapping, RunConfig{}.mapping_weights);
    RayLossTerms t;
    t.valid_depth = true;
    t.rgb = 1.0;
    t.depth = 1.0;
    t.center = 1.0;
    t.n_center = 1;
    t.tail = 1.0;
    t.n_tail = 1;
    t.fs = 1.0;
    t.n_fs = 1;
    const std::vector<RayLossTerms> terms{t};
    const LossBreakdown out = aggregate_loss(rec, terms);
    CHECK(out.total == doctest::Approx(220.1).epsilon(1e-12));
}

TEST_CASE("tracking defaults follow the published weighting") {
    RunConfig cfg;
    CHECK(cfg.tracking_weights.rgb == 5.0);
    CHECK(cfg.tracking_weights.depth == 1.0);
    CHECK(cfg.tracking_weights.sdf_center == 200.0);
    CHECK(cfg.tracking_weights.sdf_tail == 50.0);
    CHECK(cfg.tracking_weights.free_space == 10.0);
    CHECK(cfg.mapping_weights.depth == 0.1);
    CHECK(cfg.mapping_weights.sdf_tail == 10.0);
    CHECK(cfg.mapping_weights.free_space == 5.0);
}

TEST_CASE("mapping rgb ignores the confidence mask") {
    BatchRecord rec = make_record(2, OptimMode::mapping, LossWeights{1, 1, 0, 0, 0});
    rec.cf = {0, 0}; // everything masked
    rec.m_star_rgb = 0;
    rec.m_star_depth = 0;
    RayLossTerms t;
    t.rgb = 0.5;
    t.depth = 0.7;
    t.valid_depth = true;
    const std::vector<RayLossTerms> terms{t, t};
    const LossBreakdown out = aggregate_loss(rec, terms);
    CHECK(out.rgb == doctest::Approx(0.5)); // unmasked mean over M
    CHECK(out.depth == 0.0);                // fully masked depth contributes nothing
}

TEST_CASE("tracking loss depends only on unmasked rays") {
    BatchRecord rec = make_record(2, OptimMode::tracking, LossWeights{1, 1, 1, 1, 1});
    rec.cf = {1, 0};
    rec.m_star_rgb = 1;
    rec.m_star_depth = 1;
    RayLossTerms keep;
    keep.valid_depth = true;
    keep.rgb = 0.25;
    RayLossTerms masked;
    masked.valid_depth = true;
    masked.rgb = 123.0; // arbitrarily corrupted
    masked.depth = 9000.0;
    const std::vector<RayLossTerms> a{keep, masked};
    RayLossTerms masked2 = masked;
    masked2.rgb = -555.0;
    masked2.depth = 1.0;
    const std::vector<RayLossTerms> b{keep, masked2};
    CHECK(aggregate_loss(rec, a).total == aggregate_loss(rec, b).total);
}

TEST_CASE("duplicating every ray leaves the loss unchanged") {
    BatchRecord rec = make_record(2, OptimMode::tracking, LossWeights{2, 3, 4, 5, 6});
    RayLossTerms t1, t2;
    t1.valid_depth = true;
    t1.rgb = 0.4;
    t1.depth = 0.1;
    t1.center = 0.2;
    t1.n_center = 2;
    t2.rgb = 0.9; // invalid depth ray
    const std::vector<RayLossTerms> once{t1, t2};
    rec.m_star_depth = 1;
    const LossBreakdown a = aggregate_loss(rec, once);

    BatchRecord rec2 = make_record(4, OptimMode::tracking, rec.weights);
    rec2.m_star_depth = 2;
    const std::vector<RayLossTerms> twice{t1, t2, t1, t2};
    const LossBreakdown b = aggregate_loss(rec2, twice);
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-14));
}

TEST_CASE("mask monotonicity in the threshold") {
    const std::vector<double> betas{0.0, 0.004, 0.011, 0.3, 1.0};
    int prev = 0;
    for (const double thresh : {0.0, 0.005, 0.02, 0.5, 1.0}) {
        int count = 0;
        for (const double b : betas)
            if (confidence_mask(b, thresh)) ++count;
        CHECK(count >= prev);
        prev = count;
    }
}

TEST_CASE("non-finite losses are rejected by term name") {
    BatchRecord rec = make_record(1, OptimMode::mapping, RunConfig{}.mapping_weights);
    RayLossTerms t;
    t.rgb = std::numeric_limits<double>::quiet_NaN();
    const std::vector<RayLossTerms> terms{t};
    CHECK_THROWS_WITH_AS(aggregate_loss(rec, terms), doctest::Contains("rgb"), std::runtime_error);
}
