#include "gridslam/fd_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridslam {

std::vector<FdBlockResult> finite_difference_check(const std::function<double()>& loss,
                                                   std::vector<FdBlock>& blocks, double h,
                                                   double fd_floor, double tolerance) {
    std::vector<FdBlockResult> results;
    for (FdBlock& blk : blocks) {
        FdBlockResult res;
        res.name = blk.name;
        std::vector<int> coords = blk.coords;
        if (coords.empty()) {
            coords.resize(blk.dim);
            for (int i = 0; i < blk.dim; ++i) coords[i] = i;
        }
        double sum_rel = 0.0;
        bool have_f0 = false;
        double f0 = 0.0;
        for (const int k : coords) {
            const double base = blk.get(k);
            auto central = [&](double step) {
                blk.set(k, base + step);
                const double fp = loss();
                blk.set(k, base - step);
                const double fm = loss();
                blk.set(k, base);
                return (fp - fm) / (2.0 * step);
            };
            if (!have_f0) {
                f0 = loss();
                have_f0 = true;
            }
            const double fd = central(h);
            // Catastrophic-cancellation bound of the probe itself: central
            // differences on a loss of this magnitude cannot certify the
            // tolerance below this |fd|, so such coordinates are flagged
            // like the underflow case.
            const double probe_noise =
                20.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(f0), 1e-3) /
                (2.0 * h);
            if (std::abs(fd) <= fd_floor || std::abs(fd) * tolerance <= probe_noise) {
                ++res.flagged;
                continue;
            }
            const double rel = std::abs(blk.analytic[k] - fd) / std::abs(fd);
            if (rel < tolerance) {
                res.max_rel = std::max(res.max_rel, rel);
                sum_rel += rel;
                ++res.checked;
                continue;
            }
            // Missed at h: decide between a kink inside the probe interval
            // and a genuine gradient error by walking toward the limit.
            const double fd10 = central(h / 10.0);
            const double fd100 = central(h / 100.0);
            const double rel10 = std::abs(blk.analytic[k] - fd10) / std::max(std::abs(fd10), 1e-300);
            const double rel100 =
                std::abs(blk.analytic[k] - fd100) / std::max(std::abs(fd100), 1e-300);
            if (rel100 < tolerance && rel10 < rel) {
                ++res.kinks;
                continue;
            }
            // A kink at the base point itself leaves every central probe on
            // the two-sided average; the derivative then equals one of the
            // one-sided slopes, measured where curvature is negligible.
            const double hs = h / 100.0;
            blk.set(k, base + hs);
            const double fwd = (loss() - f0) / hs;
            blk.set(k, base - hs);
            const double bwd = (f0 - loss()) / hs;
            blk.set(k, base);
            const double side_scale = std::max({std::abs(fwd), std::abs(bwd), 1e-12});
            const bool base_kink = std::abs(fwd - bwd) > 10.0 * tolerance * side_scale;
            const double side_rel =
                std::min(std::abs(blk.analytic[k] - fwd), std::abs(blk.analytic[k] - bwd)) /
                side_scale;
            if (base_kink && side_rel < tolerance) {
                ++res.kinks;
            } else {
                ++res.failed;
                res.max_rel = std::max(res.max_rel, rel);
            }
        }
        if (res.checked > 0) res.mean_rel = sum_rel / res.checked;
        results.push_back(std::move(res));
    }
    return results;
}

namespace {

// Prefer coordinates the analytic gradient actually touches, then pad with a
// few untouched ones so zero gradients get exercised too.
std::vector<int> pick_coords(const std::vector<double>& analytic, int want, Rng& rng) {
    const int dim = int(analytic.size());
    if (want <= 0 || want >= dim) return {};
    std::vector<int> touched, untouched;
    for (int i = 0; i < dim; ++i)
        (analytic[i] != 0.0 ? touched : untouched).push_back(i);
    auto take = [&rng](std::vector<int>& pool, int count, std::vector<int>& out) {
        for (int i = 0; i < count && !pool.empty(); ++i) {
            const int j = rng.uniform_int(int(pool.size()));
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
    };
    std::vector<int> coords;
    const int n_untouched = std::min<int>(want / 8 + 1, int(untouched.size()));
    take(touched, want - n_untouched, coords);
    take(untouched, want - int(coords.size()), coords);
    std::sort(coords.begin(), coords.end());
    return coords;
}

FdBlock span_block(const std::string& name, std::span<double> values,
                   const std::vector<double>& analytic, int want, Rng& rng) {
    FdBlock blk;
    blk.name = name;
    blk.dim = int(values.size());
    blk.get = [values](int k) { return values[k]; };
    blk.set = [values](int k, double v) { values[k] = v; };
    blk.analytic = analytic;
    blk.coords = pick_coords(analytic, want, rng);
    return blk;
}

} // namespace

std::vector<FdBlock> pipeline_fd_blocks(SceneField& field, std::vector<Pose>& poses,
                                        const BatchRecord& record, const GradientReport& report,
                                        const BlockSelection& selection, int coords_per_block,
                                        Rng& rng) {
    (void)record;
    std::vector<FdBlock> blocks;
    if (selection.geometry_grid)
        blocks.push_back(span_block("geometry_grid", field.geometry_grid().params(),
                                    report.geometry_grid, coords_per_block, rng));
    if (selection.appearance_grid)
        blocks.push_back(span_block("appearance_grid", field.appearance_grid().params(),
                                    report.appearance_grid, coords_per_block, rng));
    if (selection.geometry_decoder)
        blocks.push_back(span_block("geometry_decoder", field.geometry_decoder().params(),
                                    report.geometry_decoder, coords_per_block, rng));
    if (selection.appearance_decoder)
        blocks.push_back(span_block("appearance_decoder", field.appearance_decoder().params(),
                                    report.appearance_decoder, coords_per_block, rng));
    if (selection.alpha) {
        FdBlock blk;
        blk.name = "alpha";
        blk.dim = 1;
        SceneField* f = &field;
        blk.get = [f](int) { return f->alpha(); };
        blk.set = [f](int, double v) { f->set_alpha(v); };
        blk.analytic = {report.alpha};
        blocks.push_back(std::move(blk));
    }
    for (size_t p = 0; p < poses.size(); ++p) {
        if (selection.poses.empty() || !selection.poses[p]) continue;
        const Pose base = poses[p];
        Pose* live = &poses[p];
        {
            FdBlock blk;
            blk.name = "pose_rotation[" + std::to_string(p) + "]";
            blk.dim = 3;
            blk.get = [](int) { return 0.0; };
            blk.set = [live, base](int k, double v) {
                *live = base;
                if (v != 0.0) live->apply_increment(Vec3::Unit(k) * v, Vec3::Zero());
            };
            const Vec3& g = report.pose_rotation[p];
            blk.analytic = {g.x(), g.y(), g.z()};
            blocks.push_back(std::move(blk));
        }
        {
            FdBlock blk;
            blk.name = "pose_translation[" + std::to_string(p) + "]";
            blk.dim = 3;
            blk.get = [](int) { return 0.0; };
            blk.set = [live, base](int k, double v) {
                *live = base;
                if (v != 0.0) live->translation[k] += v;
            };
            const Vec3& g = report.pose_translation[p];
            blk.analytic = {g.x(), g.y(), g.z()};
            blocks.push_back(std::move(blk));
        }
    }
    return blocks;
}

std::string format_fd_table(const std::vector<FdBlockResult>& results) {
    std::ostringstream out;
    out << "block                        checked  flagged  kinks  failed     max_rel    mean_rel\n";
    char line[160];
    for (const auto& r : results) {
        std::snprintf(line, sizeof(line), "%-28s %7d  %7d  %5d  %6d  %10.3e  %10.3e\n",
                      r.name.c_str(), r.checked, r.flagged, r.kinks, r.failed, r.max_rel,
                      r.mean_rel);
        out << line;
    }
    return out.str();
}

} // namespace gridslam
