#include "gridslam/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "gridslam/parallel.hpp"
#include "gridslam/ray_sampling.hpp"
#include "gridslam/rng.hpp"
#include "gridslam/volume_render.hpp"

namespace gridslam {

AteResult ate_rmse(std::span<const Pose> estimated, std::span<const Pose> ground_truth,
                   bool with_scale) {
    if (estimated.size() != ground_truth.size())
        throw std::runtime_error("ate: trajectory length mismatch");
    if (estimated.size() < 3) throw std::runtime_error("ate: need at least 3 poses");
    const int n = int(estimated.size());
    Eigen::Matrix3Xd src(3, n), dst(3, n);
    for (int i = 0; i < n; ++i) {
        src.col(i) = estimated[i].translation;
        dst.col(i) = ground_truth[i].translation;
    }
    const Mat4 t = Eigen::umeyama(src, dst, with_scale);
    AteResult res;
    double sum_sq = 0.0, sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec3 aligned = t.block<3, 3>(0, 0) * src.col(i) + t.block<3, 1>(0, 3);
        const double err = (aligned - dst.col(i)).norm();
        sum_sq += err * err;
        sum += err;
    }
    res.rmse_cm = std::sqrt(sum_sq / n) * 100.0;
    res.mean_cm = sum / n * 100.0;
    return res;
}

double depth_l1_cm(const SceneField& field, std::span<const Pose> poses, const FrameSequence& seq,
                   int stride, int n_stratified, double near_clamp) {
    if (stride < 1) stride = 1;
    const CameraIntrinsics& intr = seq.intrinsics;
    double total = 0.0;
    size_t count = 0;
    for (size_t f = 0; f < seq.frames.size(); f += stride) {
        const Frame& frame = seq.frames[f];
        const Pose& pose = poses[f];
        std::vector<double> err(size_t(intr.height), 0.0);
        std::vector<size_t> cnt(size_t(intr.height), 0);
        parallel_for(size_t(intr.height), [&](size_t yy) {
            const int y = int(yy);
            for (int x = 0; x < intr.width; ++x) {
                const double sensor_z = frame.depth.at(x, y);
                if (sensor_z <= 0.0) continue;
                const Vec3 dir_cam = intr.pixel_dir(x, y);
                const double dn = dir_cam.norm();
                const Ray ray{pose.translation, pose.rotate(dir_cam) / dn};
                const auto nf = ray_near_far(ray, field.scene_bounds(), near_clamp);
                if (!nf) continue;
                // Deterministic midpoints; evaluation needs no jitter.
                std::vector<double> dist(n_stratified);
                const double step = (nf->second - nf->first) / n_stratified;
                for (int k = 0; k < n_stratified; ++k)
                    dist[k] = nf->first + (k + 0.5) * step;
                const double rendered_ray = render_depth(field, ray.origin, ray.dir, dist);
                const double rendered_z = rendered_ray / dn;
                err[yy] += std::abs(rendered_z - sensor_z);
                ++cnt[yy];
            }
        });
        for (int y = 0; y < intr.height; ++y) {
            total += err[y];
            count += cnt[y];
        }
    }
    if (count == 0) return 0.0;
    return total / double(count) * 100.0;
}

namespace {

std::vector<Vec3> sample_mesh_surface(const TriangleMesh& mesh, int n_samples, Rng& rng) {
    if (mesh.triangles.empty()) throw std::runtime_error("mesh metrics: empty mesh");
    std::vector<double> cdf(mesh.triangles.size());
    double acc = 0.0;
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        acc += mesh.area(int(t));
        cdf[t] = acc;
    }
    if (acc <= 0.0) throw std::runtime_error("mesh metrics: zero-area mesh");
    std::vector<Vec3> points(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double u = rng.uniform() * acc;
        const size_t t = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        const auto& tri = mesh.triangles[std::min(t, mesh.triangles.size() - 1)];
        double a = rng.uniform(), b = rng.uniform();
        if (a + b > 1.0) {
            a = 1.0 - a;
            b = 1.0 - b;
        }
        points[i] = mesh.vertices[tri[0]] + a * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
                    b * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
    }
    return points;
}

// Uniform spatial-bin nearest neighbor with expanding ring search.
class BinIndex {
public:
    BinIndex(const std::vector<Vec3>& points, double cell) : points_(points), cell_(cell) {
        lo_ = points.front();
        for (const Vec3& p : points) lo_ = lo_.cwiseMin(p);
        for (size_t i = 0; i < points.size(); ++i) bins_[key(points[i])].push_back(int(i));
    }

    double nearest_distance(const Vec3& q) const {
        double best = std::numeric_limits<double>::infinity();
        const Eigen::Vector3i c = cell_of(q);
        for (int ring = 0;; ++ring) {
            // Once a hit exists, one extra ring guarantees correctness.
            bool scanned = false;
            for (int dz = -ring; dz <= ring; ++dz)
                for (int dy = -ring; dy <= ring; ++dy)
                    for (int dx = -ring; dx <= ring; ++dx) {
                        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                        const auto it = bins_.find(pack(c.x() + dx, c.y() + dy, c.z() + dz));
                        if (it == bins_.end()) continue;
                        scanned = true;
                        for (const int i : it->second)
                            best = std::min(best, (points_[i] - q).norm());
                    }
            (void)scanned;
            if (std::isfinite(best) && double(ring) * cell_ >= best + cell_) break;
            if (ring > 4096) break;
        }
        return best;
    }

private:
    Eigen::Vector3i cell_of(const Vec3& p) const {
        return Eigen::Vector3i(int(std::floor((p.x() - lo_.x()) / cell_)),
                               int(std::floor((p.y() - lo_.y()) / cell_)),
                               int(std::floor((p.z() - lo_.z()) / cell_)));
    }
    static uint64_t pack(int x, int y, int z) {
        auto u = [](int v) { return uint64_t(uint32_t(v + (1 << 20))) & 0x1fffff; };
        return u(x) | (u(y) << 21) | (u(z) << 42);
    }
    uint64_t key(const Vec3& p) const {
        const auto c = cell_of(p);
        return pack(c.x(), c.y(), c.z());
    }

    const std::vector<Vec3>& points_;
    double cell_;
    Vec3 lo_;
    std::unordered_map<uint64_t, std::vector<int>> bins_;
};

std::vector<double> nn_distances(const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    std::vector<double> out(from.size());
    if (to.size() < 10000) {
        parallel_for(from.size(), [&](size_t i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec3& p : to) best = std::min(best, (p - from[i]).norm());
            out[i] = best;
        });
        return out;
    }
    const BinIndex index(to, 0.02);
    parallel_for(from.size(), [&](size_t i) { out[i] = index.nearest_distance(from[i]); });
    return out;
}

} // namespace

MeshCompareResult mesh_accuracy_completion(const TriangleMesh& reconstructed,
                                           const TriangleMesh& ground_truth, int n_samples,
                                           uint64_t seed) {
    // Both meshes sample with the same stream, so identical meshes yield
    // identical point sets (and exactly zero distances).
    Rng rng_rec(seed), rng_gt(seed);
    const auto rec_pts = sample_mesh_surface(reconstructed, n_samples, rng_rec);
    const auto gt_pts = sample_mesh_surface(ground_truth, n_samples, rng_gt);
    const auto rec_to_gt = nn_distances(rec_pts, gt_pts);
    const auto gt_to_rec = nn_distances(gt_pts, rec_pts);

    MeshCompareResult r;
    double acc = 0.0;
    for (const double d : rec_to_gt) acc += d;
    r.accuracy_cm = acc / rec_to_gt.size() * 100.0;
    double comp = 0.0;
    int within1 = 0, within3 = 0, within5 = 0;
    for (const double d : gt_to_rec) {
        comp += d;
        if (d < 0.01) ++within1;
        if (d < 0.03) ++within3;
        if (d < 0.05) ++within5;
    }
    r.completion_cm = comp / gt_to_rec.size() * 100.0;
    r.comp_ratio_1cm_pct = 100.0 * within1 / double(gt_to_rec.size());
    r.comp_ratio_3cm_pct = 100.0 * within3 / double(gt_to_rec.size());
    r.comp_ratio_5cm_pct = 100.0 * within5 / double(gt_to_rec.size());
    return r;
}

double psnr_db(const Image& rendered, const Image& reference) {
    if (rendered.width != reference.width || rendered.height != reference.height ||
        rendered.channels != reference.channels)
        throw std::runtime_error("psnr: image dimension mismatch");
    double mse = 0.0;
    for (size_t i = 0; i < rendered.data.size(); ++i) {
        const double d = rendered.data[i] - reference.data[i];
        mse += d * d;
    }
    mse /= double(rendered.data.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

std::string MetricReport::to_key_values() const {
    std::ostringstream out;
    out.precision(10);
    out << "ate_rmse_cm = " << ate_rmse_cm << "\n";
    out << "ate_mean_cm = " << ate_mean_cm << "\n";
    out << "depth_l1_cm = " << depth_l1_cm << "\n";
    out << "acc_cm = " << acc_cm << "\n";
    out << "comp_cm = " << comp_cm << "\n";
    out << "comp_ratio_1cm_pct = " << comp_ratio_1cm_pct << "\n";
    out << "comp_ratio_3cm_pct = " << comp_ratio_3cm_pct << "\n";
    out << "comp_ratio_5cm_pct = " << comp_ratio_5cm_pct << "\n";
    out << "psnr_db = " << psnr_db << "\n";
    out << "seed = " << seed << "\n";
    out << "config_digest = " << config_digest << "\n";
    return out.str();
}

std::string MetricReport::to_csv_row() const {
    std::ostringstream out;
    out.precision(10);
    out << "ate_rmse_cm,ate_mean_cm,depth_l1_cm,acc_cm,comp_cm,comp_ratio_1cm_pct,"
           "comp_ratio_3cm_pct,comp_ratio_5cm_pct,psnr_db,seed,config_digest\n";
    out << ate_rmse_cm << "," << ate_mean_cm << "," << depth_l1_cm << "," << acc_cm << ","
        << comp_cm << "," << comp_ratio_1cm_pct << "," << comp_ratio_3cm_pct << ","
        << comp_ratio_5cm_pct << "," << psnr_db << "," << seed << "," << config_digest << "\n";
    return out.str();
}

} // namespace gridslam
