#include "gridslam/triangle_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridslam {
namespace {

uint8_t quantize_channel(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

} // namespace

void save_ply(const TriangleMesh& mesh, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("ply: cannot open " + path + " for writing");
    const bool colors = mesh.has_colors();
    out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    if (binary) {
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const float xyz[3] = {float(mesh.vertices[i].x()), float(mesh.vertices[i].y()),
                                  float(mesh.vertices[i].z())};
            out.write(reinterpret_cast<const char*>(xyz), 12);
            if (colors) {
                const uint8_t rgb[3] = {quantize_channel(mesh.colors[i].x()),
                                        quantize_channel(mesh.colors[i].y()),
                                        quantize_channel(mesh.colors[i].z())};
                out.write(reinterpret_cast<const char*>(rgb), 3);
            }
        }
        for (const auto& t : mesh.triangles) {
            const uint8_t n = 3;
            out.write(reinterpret_cast<const char*>(&n), 1);
            const int32_t idx[3] = {t[0], t[1], t[2]};
            out.write(reinterpret_cast<const char*>(idx), 12);
        }
    } else {
        out.precision(9);
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            out << float(mesh.vertices[i].x()) << " " << float(mesh.vertices[i].y()) << " "
                << float(mesh.vertices[i].z());
            if (colors)
                out << " " << int(quantize_channel(mesh.colors[i].x())) << " "
                    << int(quantize_channel(mesh.colors[i].y())) << " "
                    << int(quantize_channel(mesh.colors[i].z()));
            out << "\n";
        }
        for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    if (!out) throw std::runtime_error("ply: write failed for " + path);
}

TriangleMesh load_ply(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("ply: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw std::runtime_error("ply: bad header in " + path);

    bool binary = false;
    size_t n_vertices = 0, n_faces = 0;
    bool has_colors = false;
    std::string element;
    int vertex_props = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian")
                binary = true;
            else if (fmt != "ascii")
                throw std::runtime_error("ply: unsupported format " + fmt);
        } else if (tok == "element") {
            std::string name;
            size_t count;
            ls >> name >> count;
            element = name;
            if (name == "vertex") n_vertices = count;
            if (name == "face") n_faces = count;
        } else if (tok == "property" && element == "vertex") {
            std::string type, name;
            ls >> type >> name;
            ++vertex_props;
            if (name == "red") has_colors = true;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (vertex_props != 3 && vertex_props != 6)
        throw std::runtime_error("ply: unsupported vertex layout in " + path);

    TriangleMesh mesh;
    mesh.vertices.resize(n_vertices);
    if (has_colors) mesh.colors.resize(n_vertices);
    mesh.triangles.resize(n_faces);
    if (binary) {
        for (size_t i = 0; i < n_vertices; ++i) {
            float xyz[3];
            in.read(reinterpret_cast<char*>(xyz), 12);
            mesh.vertices[i] = Vec3(xyz[0], xyz[1], xyz[2]);
            if (has_colors) {
                uint8_t rgb[3];
                in.read(reinterpret_cast<char*>(rgb), 3);
                mesh.colors[i] = Vec3(rgb[0], rgb[1], rgb[2]) / 255.0;
            }
        }
        for (size_t i = 0; i < n_faces; ++i) {
            uint8_t n;
            in.read(reinterpret_cast<char*>(&n), 1);
            if (n != 3) throw std::runtime_error("ply: non-triangle face in " + path);
            int32_t idx[3];
            in.read(reinterpret_cast<char*>(idx), 12);
            mesh.triangles[i] = {idx[0], idx[1], idx[2]};
        }
    } else {
        for (size_t i = 0; i < n_vertices; ++i) {
            double x, y, z;
            in >> x >> y >> z;
            mesh.vertices[i] = Vec3(x, y, z);
            if (has_colors) {
                int r, g, b;
                in >> r >> g >> b;
                mesh.colors[i] = Vec3(r, g, b) / 255.0;
            }
        }
        for (size_t i = 0; i < n_faces; ++i) {
            int n, a, b, c;
            in >> n >> a >> b >> c;
            if (n != 3) throw std::runtime_error("ply: non-triangle face in " + path);
            mesh.triangles[i] = {a, b, c};
        }
    }
    if (!in) throw std::runtime_error("ply: truncated file " + path);
    return mesh;
}

} // namespace gridslam
