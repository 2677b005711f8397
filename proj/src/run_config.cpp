#include "gridslam/run_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gridslam {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

double parse_double(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        fail("bad numeric value for '" + key + "': " + v);
    }
    if (pos != v.size() || !std::isfinite(out)) fail("bad numeric value for '" + key + "': " + v);
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    const int i = static_cast<int>(std::llround(d));
    if (static_cast<double>(i) != d) fail("expected integer for '" + key + "': " + v);
    return i;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail("expected boolean for '" + key + "': " + v);
}

Aabb parse_bounds(const std::string& key, const std::string& v) {
    std::istringstream in(v);
    double c[6];
    for (double& x : c)
        if (!(in >> x)) fail("'" + key + "' needs 6 numbers: " + v);
    std::string rest;
    if (in >> rest) fail("'" + key + "' needs exactly 6 numbers: " + v);
    Aabb b{Vec3(c[0], c[1], c[2]), Vec3(c[3], c[4], c[5])};
    if ((b.extent().array() <= 0).any()) fail("'" + key + "' box has non-positive extent");
    return b;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = {
        {"dataset",
         [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v != "synthetic" && v != "replica" && v != "scannet" && v != "tum")
                 fail("unknown dataset '" + v + "'");
             c.dataset = v;
             (void)k;
         }},
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = static_cast<uint64_t>(parse_int(k, v)); }},
        {"deterministic", [](RunConfig& c, const std::string& k, const std::string& v) { c.deterministic = parse_bool(k, v); }},
        {"scene_bounds", [](RunConfig& c, const std::string& k, const std::string& v) { c.scene_bounds = parse_bounds(k, v); }},
        {"geometry_levels", [](RunConfig& c, const std::string& k, const std::string& v) { c.geometry_levels = parse_int(k, v); }},
        {"appearance_levels", [](RunConfig& c, const std::string& k, const std::string& v) { c.appearance_levels = parse_int(k, v); }},
        {"features_per_level", [](RunConfig& c, const std::string& k, const std::string& v) { c.features_per_level = parse_int(k, v); }},
        {"table_size_log2", [](RunConfig& c, const std::string& k, const std::string& v) { c.table_size_log2 = parse_int(k, v); }},
        {"base_resolution", [](RunConfig& c, const std::string& k, const std::string& v) { c.base_resolution = parse_int(k, v); }},
        {"finest_voxel_size", [](RunConfig& c, const std::string& k, const std::string& v) { c.finest_voxel_size = parse_double(k, v); }},
        {"decoder_hidden", [](RunConfig& c, const std::string& k, const std::string& v) { c.decoder_hidden = parse_int(k, v); }},
        {"alpha_init", [](RunConfig& c, const std::string& k, const std::string& v) { c.alpha_init = parse_double(k, v); }},
        {"lr_geometry_grid", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_geometry_grid = parse_double(k, v); }},
        {"lr_appearance_grid", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_appearance_grid = parse_double(k, v); }},
        {"lr_decoder", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_decoder = parse_double(k, v); }},
        {"lr_rotation", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_rotation = parse_double(k, v); }},
        {"lr_translation", [](RunConfig& c, const std::string& k, const std::string& v) { c.lr_translation = parse_double(k, v); }},
        {"tracking_lr_decay", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_lr_decay = parse_double(k, v); }},
        {"ba_pose_lr_scale", [](RunConfig& c, const std::string& k, const std::string& v) { c.ba_pose_lr_scale = parse_double(k, v); }},
        {"ba_optimize_poses", [](RunConfig& c, const std::string& k, const std::string& v) { c.ba_optimize_poses = parse_bool(k, v); }},
        {"n_stratified", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_stratified = parse_int(k, v); }},
        {"n_importance", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_importance = parse_int(k, v); }},
        {"truncation", [](RunConfig& c, const std::string& k, const std::string& v) { c.truncation = parse_double(k, v); }},
        {"spacing_scaled_density", [](RunConfig& c, const std::string& k, const std::string& v) { c.spacing_scaled_density = parse_bool(k, v); }},
        {"pixel_uncertainty_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.pixel_uncertainty_threshold = parse_double(k, v); }},
        {"image_uncertainty_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.image_uncertainty_threshold = parse_double(k, v); }},
        {"uncertainty_reweighting", [](RunConfig& c, const std::string& k, const std::string& v) { c.uncertainty_reweighting = parse_bool(k, v); }},
        {"covisibility_threshold", [](RunConfig& c, const std::string& k, const std::string& v) { c.covisibility_threshold = parse_double(k, v); }},
        {"loop_min_frame_gap", [](RunConfig& c, const std::string& k, const std::string& v) { c.loop_min_frame_gap = parse_int(k, v); }},
        {"covis_pixels", [](RunConfig& c, const std::string& k, const std::string& v) { c.covis_pixels = parse_int(k, v); }},
        {"covis_samples", [](RunConfig& c, const std::string& k, const std::string& v) { c.covis_samples = parse_int(k, v); }},
        {"tracking_rays", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_rays = parse_int(k, v); }},
        {"tracking_iterations", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_iterations = parse_int(k, v); }},
        {"mapping_rays", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_rays = parse_int(k, v); }},
        {"mapping_iterations", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_iterations = parse_int(k, v); }},
        {"first_frame_iterations", [](RunConfig& c, const std::string& k, const std::string& v) { c.first_frame_iterations = parse_int(k, v); }},
        {"mapping_interval", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_interval = parse_int(k, v); }},
        {"local_window", [](RunConfig& c, const std::string& k, const std::string& v) { c.local_window = parse_int(k, v); }},
        {"edge_crop", [](RunConfig& c, const std::string& k, const std::string& v) { c.edge_crop = parse_int(k, v); }},
        {"tracking_rgb_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_weights.rgb = parse_double(k, v); }},
        {"tracking_depth_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_weights.depth = parse_double(k, v); }},
        {"tracking_sdf_center_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_weights.sdf_center = parse_double(k, v); }},
        {"tracking_sdf_tail_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_weights.sdf_tail = parse_double(k, v); }},
        {"tracking_free_space_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.tracking_weights.free_space = parse_double(k, v); }},
        {"mapping_rgb_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_weights.rgb = parse_double(k, v); }},
        {"mapping_depth_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_weights.depth = parse_double(k, v); }},
        {"mapping_sdf_center_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_weights.sdf_center = parse_double(k, v); }},
        {"mapping_sdf_tail_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_weights.sdf_tail = parse_double(k, v); }},
        {"mapping_free_space_weight", [](RunConfig& c, const std::string& k, const std::string& v) { c.mapping_weights.free_space = parse_double(k, v); }},
        {"mesh_resolution", [](RunConfig& c, const std::string& k, const std::string& v) { c.mesh_resolution = parse_double(k, v); }},
    };
    return table;
}

// Published per-dataset deviations from the default setting. Applied only
// for keys the file does not set explicitly.
const std::map<std::string, std::map<std::string, std::string>>& dataset_overrides() {
    static const std::map<std::string, std::map<std::string, std::string>> o = {
        {"replica", {{"appearance_levels", "19"}}},
        {"scannet",
         {{"mapping_interval", "5"},
          {"mapping_iterations", "20"},
          {"tracking_iterations", "20"},
          {"n_stratified", "48"},
          {"edge_crop", "75"},
          {"lr_translation", "5e-4"},
          {"lr_rotation", "3e-3"}}},
        {"tum",
         {{"image_uncertainty_threshold", "2e-3"},
          {"mapping_interval", "4"},
          {"tracking_rays", "4000"},
          {"mapping_rays", "4000"},
          {"edge_crop", "20"},
          {"tracking_iterations", "20"},
          {"mapping_iterations", "20"},
          {"n_stratified", "48"},
          {"lr_geometry_grid", "2e-2"},
          {"lr_appearance_grid", "2e-2"},
          {"lr_translation", "1e-2"},
          {"lr_rotation", "5e-3"}}},
    };
    return o;
}

void validate(const RunConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) fail("out-of-range value: " + what);
    };
    require(c.covisibility_threshold > 0 && c.covisibility_threshold <= 1,
            "covisibility_threshold must be in (0, 1]");
    require(c.geometry_levels >= 1 && c.appearance_levels >= 1, "grid levels must be >= 1");
    require(c.features_per_level >= 1, "features_per_level must be >= 1");
    require(c.table_size_log2 >= 4 && c.table_size_log2 <= 28, "table_size_log2 must be in [4, 28]");
    require(c.base_resolution >= 2, "base_resolution must be >= 2");
    require(c.finest_voxel_size > 0, "finest_voxel_size must be > 0");
    require(c.decoder_hidden >= 1, "decoder_hidden must be >= 1");
    require(c.alpha_init > 0, "alpha_init must be > 0");
    require(c.truncation > 0, "truncation must be > 0");
    require(c.n_stratified >= 1 && c.n_importance >= 0, "sample counts out of range");
    require(c.pixel_uncertainty_threshold >= 0 && c.pixel_uncertainty_threshold <= 1,
            "pixel_uncertainty_threshold must be in [0, 1]");
    require(c.image_uncertainty_threshold >= 0 && c.image_uncertainty_threshold <= 1,
            "image_uncertainty_threshold must be in [0, 1]");
    require(c.loop_min_frame_gap >= 0, "loop_min_frame_gap must be >= 0");
    require(c.covis_pixels >= 1 && c.covis_samples >= 1, "covisibility sampling counts must be >= 1");
    require(c.tracking_rays >= 1 && c.mapping_rays >= 1, "ray counts must be >= 1");
    require(c.tracking_iterations >= 1 && c.mapping_iterations >= 1 && c.first_frame_iterations >= 1,
            "iteration counts must be >= 1");
    require(c.mapping_interval >= 1, "mapping_interval must be >= 1");
    require(c.local_window >= 1, "local_window must be >= 1");
    require(c.edge_crop >= 0, "edge_crop must be >= 0");
    require(c.tracking_lr_decay > 0 && c.tracking_lr_decay <= 1, "tracking_lr_decay must be in (0, 1]");
    require(c.ba_pose_lr_scale > 0, "ba_pose_lr_scale must be > 0");
    require(c.mesh_resolution > 0, "mesh_resolution must be > 0");
    for (const LossWeights* w : {&c.tracking_weights, &c.mapping_weights})
        require(w->rgb >= 0 && w->depth >= 0 && w->sdf_center >= 0 && w->sdf_tail >= 0 &&
                    w->free_space >= 0,
                "loss weights must be >= 0");
    require(c.lr_geometry_grid > 0 && c.lr_appearance_grid > 0 && c.lr_decoder > 0 &&
                c.lr_rotation > 0 && c.lr_translation > 0,
            "learning rates must be > 0");
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> explicit_keys;
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::set<std::string> sections_seen;

    std::istringstream in(text);
    std::string line;
    std::string section; // empty = top level
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail("malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section != "replica" && section != "scannet" && section != "tum")
                fail("unknown section [" + section + "]");
            sections_seen.insert(section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key_table().count(key)) fail("unknown key '" + key + "'");
        if (section.empty()) {
            key_table().at(key)(cfg, key, value);
            explicit_keys.insert(key);
        } else {
            sections[section][key] = value;
        }
    }

    // Active dataset: explicit key wins; otherwise a single section selects it.
    if (!explicit_keys.count("dataset") && sections_seen.size() == 1) cfg.dataset = *sections_seen.begin();

    if (const auto it = dataset_overrides().find(cfg.dataset); it != dataset_overrides().end()) {
        const auto& section_keys = sections.count(cfg.dataset) ? sections.at(cfg.dataset)
                                                               : std::map<std::string, std::string>{};
        for (const auto& [key, value] : it->second)
            if (!explicit_keys.count(key) && !section_keys.count(key))
                key_table().at(key)(cfg, key, value);
    }
    if (sections.count(cfg.dataset))
        for (const auto& [key, value] : sections.at(cfg.dataset)) key_table().at(key)(cfg, key, value);

    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "dataset = " << c.dataset << "\n";
    out << "seed = " << c.seed << "\n";
    out << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
    out << "scene_bounds =";
    for (int i = 0; i < 3; ++i) out << " " << c.scene_bounds.min[i];
    for (int i = 0; i < 3; ++i) out << " " << c.scene_bounds.max[i];
    out << "\n";
    out << "geometry_levels = " << c.geometry_levels << "\n";
    out << "appearance_levels = " << c.appearance_levels << "\n";
    out << "features_per_level = " << c.features_per_level << "\n";
    out << "table_size_log2 = " << c.table_size_log2 << "\n";
    out << "base_resolution = " << c.base_resolution << "\n";
    out << "finest_voxel_size = " << c.finest_voxel_size << "\n";
    out << "decoder_hidden = " << c.decoder_hidden << "\n";
    out << "alpha_init = " << c.alpha_init << "\n";
    out << "lr_geometry_grid = " << c.lr_geometry_grid << "\n";
    out << "lr_appearance_grid = " << c.lr_appearance_grid << "\n";
    out << "lr_decoder = " << c.lr_decoder << "\n";
    out << "lr_rotation = " << c.lr_rotation << "\n";
    out << "lr_translation = " << c.lr_translation << "\n";
    out << "tracking_lr_decay = " << c.tracking_lr_decay << "\n";
    out << "ba_pose_lr_scale = " << c.ba_pose_lr_scale << "\n";
    out << "ba_optimize_poses = " << (c.ba_optimize_poses ? "true" : "false") << "\n";
    out << "n_stratified = " << c.n_stratified << "\n";
    out << "n_importance = " << c.n_importance << "\n";
    out << "truncation = " << c.truncation << "\n";
    out << "spacing_scaled_density = " << (c.spacing_scaled_density ? "true" : "false") << "\n";
    out << "pixel_uncertainty_threshold = " << c.pixel_uncertainty_threshold << "\n";
    out << "image_uncertainty_threshold = " << c.image_uncertainty_threshold << "\n";
    out << "uncertainty_reweighting = " << (c.uncertainty_reweighting ? "true" : "false") << "\n";
    out << "covisibility_threshold = " << c.covisibility_threshold << "\n";
    out << "loop_min_frame_gap = " << c.loop_min_frame_gap << "\n";
    out << "covis_pixels = " << c.covis_pixels << "\n";
    out << "covis_samples = " << c.covis_samples << "\n";
    out << "tracking_rays = " << c.tracking_rays << "\n";
    out << "tracking_iterations = " << c.tracking_iterations << "\n";
    out << "mapping_rays = " << c.mapping_rays << "\n";
    out << "mapping_iterations = " << c.mapping_iterations << "\n";
    out << "first_frame_iterations = " << c.first_frame_iterations << "\n";
    out << "mapping_interval = " << c.mapping_interval << "\n";
    out << "local_window = " << c.local_window << "\n";
    out << "edge_crop = " << c.edge_crop << "\n";
    out << "tracking_rgb_weight = " << c.tracking_weights.rgb << "\n";
    out << "tracking_depth_weight = " << c.tracking_weights.depth << "\n";
    out << "tracking_sdf_center_weight = " << c.tracking_weights.sdf_center << "\n";
    out << "tracking_sdf_tail_weight = " << c.tracking_weights.sdf_tail << "\n";
    out << "tracking_free_space_weight = " << c.tracking_weights.free_space << "\n";
    out << "mapping_rgb_weight = " << c.mapping_weights.rgb << "\n";
    out << "mapping_depth_weight = " << c.mapping_weights.depth << "\n";
    out << "mapping_sdf_center_weight = " << c.mapping_weights.sdf_center << "\n";
    out << "mapping_sdf_tail_weight = " << c.mapping_weights.sdf_tail << "\n";
    out << "mapping_free_space_weight = " << c.mapping_weights.free_space << "\n";
    out << "mesh_resolution = " << c.mesh_resolution << "\n";
    return out.str();
}

} // namespace gridslam
