#include "gridslam/scene_field.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gridslam {
namespace {

constexpr char kMagic[8] = {'G', 'S', 'L', 'M', 'C', 'K', 'P', '1'};

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }
void write_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), 8); }
uint32_t read_u32(std::istream& in) {
    uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double read_f64(std::istream& in) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

void write_block(std::ostream& out, std::span<const double> v) {
    const uint64_t n = v.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(v.data()), 8 * n);
}

void read_block(std::istream& in, std::span<double> v) {
    uint64_t n;
    in.read(reinterpret_cast<char*>(&n), 8);
    if (n != v.size()) throw std::runtime_error("checkpoint: block size mismatch");
    in.read(reinterpret_cast<char*>(v.data()), 8 * n);
}

void write_grid_layout(std::ostream& out, const HashGrid::Layout& l) {
    write_u32(out, uint32_t(l.levels));
    write_u32(out, uint32_t(l.features));
    write_u32(out, uint32_t(l.table_size_log2));
    write_u32(out, uint32_t(l.base_resolution));
    write_f64(out, l.finest_voxel_size);
    for (int i = 0; i < 3; ++i) write_f64(out, l.scene_bounds.min[i]);
    for (int i = 0; i < 3; ++i) write_f64(out, l.scene_bounds.max[i]);
}

HashGrid::Layout read_grid_layout(std::istream& in) {
    HashGrid::Layout l;
    l.levels = int(read_u32(in));
    l.features = int(read_u32(in));
    l.table_size_log2 = int(read_u32(in));
    l.base_resolution = int(read_u32(in));
    l.finest_voxel_size = read_f64(in);
    for (int i = 0; i < 3; ++i) l.scene_bounds.min[i] = read_f64(in);
    for (int i = 0; i < 3; ++i) l.scene_bounds.max[i] = read_f64(in);
    return l;
}

} // namespace

SceneField SceneField::init(const RunConfig& cfg, const Aabb& scene_bounds, Rng& rng) {
    if (scene_bounds.volume() <= 0.0) throw std::runtime_error("scene field: degenerate bounds");
    SceneField f;
    HashGridConfig geo{cfg.geometry_levels, cfg.features_per_level, cfg.table_size_log2,
                       cfg.base_resolution, cfg.finest_voxel_size};
    HashGridConfig app = geo;
    app.levels = cfg.appearance_levels;
    f.geometry_grid_ = HashGrid(geo, scene_bounds);
    f.appearance_grid_ = HashGrid(app, scene_bounds);
    f.geometry_grid_.init_features(rng);
    f.appearance_grid_.init_features(rng);
    f.geometry_decoder_ = Mlp(f.geometry_grid_.feature_dim(), cfg.decoder_hidden, 1,
                              OutputActivation::tanh_out);
    f.appearance_decoder_ = Mlp(f.appearance_grid_.feature_dim(), cfg.decoder_hidden, 3,
                                OutputActivation::sigmoid_out);
    f.geometry_decoder_.init_weights(rng);
    f.appearance_decoder_.init_weights(rng);
    f.alpha_ = cfg.alpha_init;
    return f;
}

void SceneField::set_alpha(double a) {
    // Keep the density conversion well defined under any optimizer step.
    alpha_ = std::max(a, 1e-4);
}

double SceneField::query_sdf(const Vec3& p) const {
    std::vector<double> feat(geometry_grid_.feature_dim());
    geometry_grid_.encode(p, feat.data());
    Mlp::Workspace ws;
    double out;
    geometry_decoder_.forward(feat.data(), &out, ws);
    return out;
}

Vec3 SceneField::query_color(const Vec3& p) const {
    std::vector<double> feat(appearance_grid_.feature_dim());
    appearance_grid_.encode(p, feat.data());
    Mlp::Workspace ws;
    double out[3];
    appearance_decoder_.forward(feat.data(), out, ws);
    return Vec3(out[0], out[1], out[2]);
}

void SceneField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, 8);
    write_grid_layout(out, geometry_grid_.layout());
    write_grid_layout(out, appearance_grid_.layout());
    write_u32(out, uint32_t(geometry_decoder_.hidden_dim()));
    write_block(out, geometry_grid_.params());
    write_block(out, appearance_grid_.params());
    write_block(out, geometry_decoder_.params());
    write_block(out, appearance_decoder_.params());
    write_f64(out, alpha_);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

SceneField SceneField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    SceneField f;
    const auto geo = read_grid_layout(in);
    const auto app = read_grid_layout(in);
    const int hidden = int(read_u32(in));
    f.geometry_grid_ = HashGrid::from_layout(geo);
    f.appearance_grid_ = HashGrid::from_layout(app);
    f.geometry_decoder_ = Mlp(f.geometry_grid_.feature_dim(), hidden, 1, OutputActivation::tanh_out);
    f.appearance_decoder_ =
        Mlp(f.appearance_grid_.feature_dim(), hidden, 3, OutputActivation::sigmoid_out);
    read_block(in, f.geometry_grid_.params());
    read_block(in, f.appearance_grid_.params());
    read_block(in, f.geometry_decoder_.params());
    read_block(in, f.appearance_decoder_.params());
    f.alpha_ = read_f64(in);
    if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    return f;
}

uint64_t SceneField::param_digest() const {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::span<const double> v) {
        for (const double x : v) {
            uint64_t bits;
            std::memcpy(&bits, &x, 8);
            h ^= bits;
            h *= 0x100000001b3ull;
        }
    };
    mix(geometry_grid_.params());
    mix(appearance_grid_.params());
    mix(geometry_decoder_.params());
    mix(appearance_decoder_.params());
    const double a = alpha_;
    mix(std::span<const double>(&a, 1));
    return h;
}

} // namespace gridslam
