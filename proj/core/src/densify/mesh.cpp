#include "parkocc/densify/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "parkocc/error.hpp"

namespace parkocc::densify {

void TriMesh::check() const {
  for (const auto& t : triangles) {
    for (auto i : t) {
      if (i >= vertices.size()) throw Error("densify", "triangle index out of range");
    }
  }
}

void TriMesh::append(const TriMesh& other) {
  const auto base = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  triangles.reserve(triangles.size() + other.triangles.size());
  for (const auto& t : other.triangles) triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

namespace {

struct KeyHash {
  std::size_t operator()(const std::array<long long, 3>& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (long long v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

void subdivide(const Vec3& a, const Vec3& b, const Vec3& c, double max2, std::vector<Vec3>& out,
               int depth) {
  const double e = std::max({(a - b).squaredNorm(), (b - c).squaredNorm(), (c - a).squaredNorm()});
  if (e <= max2 || depth > 40) return;
  const Vec3 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  out.push_back(ab);
  out.push_back(bc);
  out.push_back(ca);
  subdivide(a, ab, ca, max2, out, depth + 1);
  subdivide(ab, b, bc, max2, out, depth + 1);
  subdivide(ca, bc, c, max2, out, depth + 1);
  subdivide(ab, bc, ca, max2, out, depth + 1);
}

}  // namespace

std::vector<Vec3> dedupe_points(std::span<const Vec3> pts, double quantum) {
  std::unordered_set<std::array<long long, 3>, KeyHash> seen;
  seen.reserve(pts.size());
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    const std::array<long long, 3> key{std::llround(p.x() / quantum), std::llround(p.y() / quantum),
                                       std::llround(p.z() / quantum)};
    if (seen.insert(key).second) out.push_back(p);
  }
  return out;
}

std::vector<Vec3> densify_mesh(const TriMesh& mesh, double max_edge) {
  if (!(max_edge > 0)) throw Error("densify", "max_edge must be positive");
  mesh.check();
  std::vector<Vec3> pts = mesh.vertices;
  const double max2 = max_edge * max_edge;
  for (const auto& t : mesh.triangles) {
    subdivide(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]], max2, pts, 0);
  }
  return dedupe_points(pts);
}

void write_ply_mesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nelement face "
      << mesh.triangles.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_ply_points(std::span<const Vec3> pts, std::span<const std::array<std::uint8_t, 3>> colors,
                      const std::filesystem::path& path) {
  if (!colors.empty() && colors.size() != pts.size()) {
    throw Error("densify", "color count differs from point count");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << pts.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n";
  if (!colors.empty()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char buf[128];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& v = pts[i];
    if (colors.empty()) {
      std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", v.x(), v.y(), v.z());
    } else {
      std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %u %u %u\n", v.x(), v.y(), v.z(),
                    unsigned{colors[i][0]}, unsigned{colors[i][1]}, unsigned{colors[i][2]});
    }
    out << buf;
  }
}

}  // namespace parkocc::densify
