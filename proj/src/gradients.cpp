#include "gridslam/gradients.hpp"

#include <cmath>

#include "gridslam/parallel.hpp"

namespace gridslam {
namespace {

struct Accumulator {
    bool initialized = false;
    std::vector<double> geo_grid, app_grid, geo_dec, app_dec;
    double alpha = 0.0;
    std::vector<Vec3> pose_rot, pose_trans;

    void init(const SceneField& field, size_t n_poses, const BlockSelection& sel) {
        if (sel.geometry_grid) geo_grid.assign(field.geometry_grid().param_count(), 0.0);
        if (sel.appearance_grid) app_grid.assign(field.appearance_grid().param_count(), 0.0);
        if (sel.geometry_decoder) geo_dec.assign(field.geometry_decoder().param_count(), 0.0);
        if (sel.appearance_decoder) app_dec.assign(field.appearance_decoder().param_count(), 0.0);
        pose_rot.assign(n_poses, Vec3::Zero());
        pose_trans.assign(n_poses, Vec3::Zero());
        initialized = true;
    }

    void merge(const Accumulator& other) {
        if (!other.initialized) return;
        auto add = [](std::vector<double>& a, const std::vector<double>& b) {
            for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
        };
        add(geo_grid, other.geo_grid);
        add(app_grid, other.app_grid);
        add(geo_dec, other.geo_dec);
        add(app_dec, other.app_dec);
        alpha += other.alpha;
        for (size_t i = 0; i < other.pose_rot.size(); ++i) {
            pose_rot[i] += other.pose_rot[i];
            pose_trans[i] += other.pose_trans[i];
        }
    }
};

// Per-thread scratch reused across the rays of one chunk.
struct Scratch {
    std::vector<double> geo_feat, app_feat;
    std::vector<Mlp::Workspace> geo_ws, app_ws;
    std::vector<double> sdf, sigma;
    std::vector<Vec3> colors;
    std::vector<double> d_weights, d_sigma;
    std::vector<double> d_geo_feat, d_app_feat;
};

void backward_ray(const SceneField& field, std::span<const Pose> poses, const BatchRecord& rec,
                  size_t ray_index, const BlockSelection& sel, Accumulator& acc, Scratch& sc,
                  std::span<RayLossTerms> all_terms) {
    const RaySpec& spec = rec.rays[ray_index];
    const Pose& pose = poses[spec.pose_index];
    const bool want_pose = !sel.poses.empty() && sel.poses[spec.pose_index];
    const size_t n = spec.distances.size();

    // Forward, caching per-sample decoder workspaces for the reverse sweep.
    const Vec3 dir_cam = rec.intrinsics.pixel_dir(spec.u, spec.v);
    const Vec3 v_world = pose.rotate(dir_cam);
    const double v_norm = v_world.norm();
    const Vec3 dir = v_world / v_norm;
    const Vec3 origin = pose.translation;

    const int geo_dim = field.geometry_grid().feature_dim();
    const int app_dim = field.appearance_grid().feature_dim();
    sc.geo_feat.resize(geo_dim);
    sc.app_feat.resize(app_dim);
    if (sc.geo_ws.size() < n) sc.geo_ws.resize(n);
    if (sc.app_ws.size() < n) sc.app_ws.resize(n);
    sc.sdf.resize(n);
    sc.sigma.resize(n);
    sc.colors.resize(n);

    for (size_t i = 0; i < n; ++i) {
        const Vec3 x = origin + spec.distances[i] * dir;
        field.geometry_grid().encode(x, sc.geo_feat.data());
        double phi;
        field.geometry_decoder().forward(sc.geo_feat.data(), &phi, sc.geo_ws[i]);
        sc.sdf[i] = phi;
        sc.sigma[i] = sdf_to_density(phi, field.alpha());
        field.appearance_grid().encode(x, sc.app_feat.data());
        double rgb[3];
        field.appearance_decoder().forward(sc.app_feat.data(), rgb, sc.app_ws[i]);
        sc.colors[i] = Vec3(rgb[0], rgb[1], rgb[2]);
    }
    const CompositeResult comp = composite(sc.sigma, sc.colors, spec.distances, rec.spacing_scaled);

    RayEval eval;
    eval.sdf = sc.sdf;
    eval.sample_colors = sc.colors;
    eval.sigma = sc.sigma;
    eval.comp = comp;
    const RayLossTerms terms = ray_loss_terms(spec, eval, rec.truncation);
    all_terms[ray_index] = terms;

    // Upstream derivatives of the total loss w.r.t. this ray's outputs.
    const double cf = rec.cf[ray_index] ? 1.0 : 0.0;
    const LossWeights& w = rec.weights;
    const size_t m_total = rec.rays.size();

    Vec3 d_chat = Vec3::Zero();
    if (rec.mode == OptimMode::mapping) {
        d_chat = (2.0 * w.rgb / double(m_total)) * (comp.color - spec.sensor_color);
    } else if (rec.m_star_rgb > 0 && cf > 0.0) {
        d_chat = (2.0 * w.rgb / double(rec.m_star_rgb)) * (comp.color - spec.sensor_color);
    }
    double d_dhat = 0.0;
    double center_scale = 0.0, tail_scale = 0.0, fs_scale = 0.0;
    if (terms.valid_depth && cf > 0.0 && rec.m_star_depth > 0) {
        const double inv_ms = 1.0 / double(rec.m_star_depth);
        d_dhat = 2.0 * w.depth * inv_ms * (comp.depth - spec.sensor_depth);
        if (terms.n_center > 0) center_scale = 2.0 * w.sdf_center * inv_ms / terms.n_center;
        if (terms.n_tail > 0) tail_scale = 2.0 * w.sdf_tail * inv_ms / terms.n_tail;
        if (terms.n_fs > 0) fs_scale = 2.0 * w.free_space * inv_ms / terms.n_fs;
    }

    const bool any_render_grad = d_chat.squaredNorm() > 0.0 || d_dhat != 0.0;
    const bool any_sdf_grad = center_scale != 0.0 || tail_scale != 0.0 || fs_scale != 0.0;
    const bool want_geometry = sel.geometry_grid || sel.geometry_decoder;
    const bool want_appearance = sel.appearance_grid || sel.appearance_decoder;
    if (!any_render_grad && !any_sdf_grad) return;
    if (!want_geometry && !want_appearance && !sel.alpha && !want_pose) return;

    // dL/dw_i and back through the compositing recurrence.
    sc.d_weights.assign(n, 0.0);
    sc.d_sigma.assign(n, 0.0);
    if (any_render_grad) {
        for (size_t i = 0; i < n; ++i)
            sc.d_weights[i] = d_chat.dot(sc.colors[i]) + d_dhat * spec.distances[i];
        if (rec.spacing_scaled) {
            // Scaled sigmas enter the recurrence; chain the spacing factor.
            std::vector<double> scaled(n), d_scaled(n, 0.0);
            for (size_t i = 0; i < n; ++i) {
                const double sp = i + 1 < n ? spec.distances[i + 1] - spec.distances[i]
                                            : (n > 1 ? spec.distances[n - 1] - spec.distances[n - 2]
                                                     : 1.0);
                scaled[i] = sc.sigma[i] * sp;
            }
            composite_backward(scaled, sc.d_weights, d_scaled);
            for (size_t i = 0; i < n; ++i) {
                const double sp = i + 1 < n ? spec.distances[i + 1] - spec.distances[i]
                                            : (n > 1 ? spec.distances[n - 1] - spec.distances[n - 2]
                                                     : 1.0);
                sc.d_sigma[i] = d_scaled[i] * sp;
            }
        } else {
            composite_backward(sc.sigma, sc.d_weights, sc.d_sigma);
        }
    }

    Vec3 d_origin = Vec3::Zero();
    Vec3 d_dir = Vec3::Zero();
    sc.d_geo_feat.resize(geo_dim);
    sc.d_app_feat.resize(app_dim);
    std::span<double> geo_grid_grad =
        sel.geometry_grid ? std::span<double>(acc.geo_grid) : std::span<double>();
    std::span<double> app_grid_grad =
        sel.appearance_grid ? std::span<double>(acc.app_grid) : std::span<double>();
    std::span<double> geo_dec_grad =
        sel.geometry_decoder ? std::span<double>(acc.geo_dec) : std::span<double>();
    std::span<double> app_dec_grad =
        sel.appearance_decoder ? std::span<double>(acc.app_dec) : std::span<double>();

    for (size_t i = 0; i < n; ++i) {
        const Vec3 x = origin + spec.distances[i] * dir;
        Vec3 d_x = Vec3::Zero();

        double d_phi = 0.0;
        if (sc.d_sigma[i] != 0.0 || sel.alpha) {
            double ds_dphi, ds_dalpha;
            sdf_to_density_grad(sc.sdf[i], field.alpha(), &ds_dphi, &ds_dalpha);
            d_phi += sc.d_sigma[i] * ds_dphi;
            if (sel.alpha) acc.alpha += sc.d_sigma[i] * ds_dalpha;
        }
        if (any_sdf_grad) {
            const double b = spec.sensor_depth - spec.distances[i];
            switch (classify_sample(b, rec.truncation)) {
                case SampleClass::center:
                    d_phi += center_scale * (sc.sdf[i] * rec.truncation - b) * rec.truncation;
                    break;
                case SampleClass::tail:
                    d_phi += tail_scale * (sc.sdf[i] * rec.truncation - b) * rec.truncation;
                    break;
                case SampleClass::free_space:
                    d_phi += fs_scale * (sc.sdf[i] - 1.0);
                    break;
                case SampleClass::unsupervised:
                    break;
            }
        }
        if (d_phi != 0.0 && (want_geometry || want_pose)) {
            std::fill(sc.d_geo_feat.begin(), sc.d_geo_feat.end(), 0.0);
            field.geometry_decoder().backward(sc.geo_ws[i], &d_phi, geo_dec_grad,
                                              (sel.geometry_grid || want_pose) ? sc.d_geo_feat.data()
                                                                               : nullptr);
            if (sel.geometry_grid || want_pose)
                field.geometry_grid().encode_backward(x, sc.d_geo_feat.data(), geo_grid_grad,
                                                      want_pose ? &d_x : nullptr);
        }
        const Vec3 d_color = d_chat * comp.weights[i];
        if (d_color.squaredNorm() > 0.0 && (want_appearance || want_pose)) {
            std::fill(sc.d_app_feat.begin(), sc.d_app_feat.end(), 0.0);
            double d_rgb[3] = {d_color.x(), d_color.y(), d_color.z()};
            field.appearance_decoder().backward(sc.app_ws[i], d_rgb, app_dec_grad,
                                                (sel.appearance_grid || want_pose)
                                                    ? sc.d_app_feat.data()
                                                    : nullptr);
            if (sel.appearance_grid || want_pose)
                field.appearance_grid().encode_backward(x, sc.d_app_feat.data(), app_grid_grad,
                                                        want_pose ? &d_x : nullptr);
        }
        if (want_pose) {
            d_origin += d_x;
            d_dir += spec.distances[i] * d_x;
        }
    }

    if (want_pose) {
        // dir = v / |v|;  d/dv = (I - dir dir^T) / |v|;  left-perturbation
        // rotation gradient is v x dL/dv.
        const Vec3 d_v = (d_dir - dir * dir.dot(d_dir)) / v_norm;
        acc.pose_rot[spec.pose_index] += v_world.cross(d_v);
        acc.pose_trans[spec.pose_index] += d_origin;
    }
}

} // namespace

GradientReport compute_gradients(const SceneField& field, std::span<const Pose> poses,
                                 const BatchRecord& record, const BlockSelection& selection) {
    const size_t n_rays = record.rays.size();
    const size_t n_poses = poses.size();
    const int workers = std::max<int>(1, int(std::min<size_t>(thread_count(), std::max<size_t>(n_rays, 1))));

    std::vector<Accumulator> acc(workers);
    std::vector<RayLossTerms> all_terms(n_rays);
    acc[0].init(field, n_poses, selection);
    parallel_chunks(n_rays, [&](int chunk, size_t begin, size_t end) {
        Accumulator& a = acc[chunk];
        if (!a.initialized) a.init(field, n_poses, selection);
        Scratch sc;
        for (size_t i = begin; i < end; ++i)
            backward_ray(field, poses, record, i, selection, a, sc, all_terms);
    });
    for (int c = 1; c < workers; ++c) acc[0].merge(acc[c]);

    GradientReport rep;
    Accumulator& a = acc[0];
    rep.geometry_grid = std::move(a.geo_grid);
    rep.appearance_grid = std::move(a.app_grid);
    rep.geometry_decoder = std::move(a.geo_dec);
    rep.appearance_decoder = std::move(a.app_dec);
    rep.alpha = selection.alpha ? a.alpha : 0.0;
    rep.pose_rotation = std::move(a.pose_rot);
    rep.pose_translation = std::move(a.pose_trans);
    for (size_t p = 0; p < n_poses; ++p) {
        if (selection.poses.empty() || !selection.poses[p]) {
            rep.pose_rotation[p].setZero();
            rep.pose_translation[p].setZero();
        }
    }

    rep.loss = aggregate_loss(record, all_terms);

    double mx = std::abs(rep.alpha);
    for (const auto* blk :
         {&rep.geometry_grid, &rep.appearance_grid, &rep.geometry_decoder, &rep.appearance_decoder})
        for (const double g : *blk) mx = std::max(mx, std::abs(g));
    for (size_t p = 0; p < n_poses; ++p) {
        mx = std::max(mx, rep.pose_rotation[p].cwiseAbs().maxCoeff());
        mx = std::max(mx, rep.pose_translation[p].cwiseAbs().maxCoeff());
    }
    rep.max_abs = mx;
    return rep;
}

} // namespace gridslam
