#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "parkocc/densify/poisson.hpp"
#include "parkocc/error.hpp"

namespace parkocc::densify {

namespace {

// Corner c of a cube sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
struct Edge {
  int a, b, axis;
};

struct Tables {
  std::array<Edge, 12> edges{};
  // Per case: closed loops of edge ids, rotated so that fanning from the
  // first entry never draws a diagonal inside a cube face. Loops where no
  // such start exists are flagged and fanned from their centroid instead.
  std::array<std::vector<std::vector<int>>, 256> loops;
  std::array<std::vector<bool>, 256> center_fan;
};

int edge_between(const std::array<Edge, 12>& edges, int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((edges[e].a == a && edges[e].b == b) || (edges[e].a == b && edges[e].b == a)) return e;
  }
  return -1;
}

// Two cube edges lie on a common face iff they are distinct and their
// endpoints agree in the coordinate that is normal to that face.
bool share_face(const Edge& x, const Edge& y) {
  for (int axis = 0; axis < 3; ++axis) {
    if (axis == x.axis || axis == y.axis) continue;
    if (((x.a >> axis) & 1) == ((y.a >> axis) & 1)) return true;
  }
  return false;
}

// Each face contributes directed segments between its sign-change edges,
// running with the inside region on the left as seen from outside the cube.
// Faces with four crossings cut off each inside corner separately. Both rules
// depend only on the face, so neighboring cubes agree (with opposite
// directions) and the surface is crack-free and consistently oriented.
Tables build_tables() {
  Tables t;
  int n = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (int c = 0; c < 8; ++c) {
      if (c & (1 << axis)) continue;
      t.edges[n++] = {c, c | (1 << axis), axis};
    }
  }
  std::array<std::array<int, 4>, 6> faces{};
  int f = 0;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const int base = side << axis;
      // Counter-clockwise seen from outside.
      if (side == 1) {
        faces[f++] = {base, base | (1 << u), base | (1 << u) | (1 << v), base | (1 << v)};
      } else {
        faces[f++] = {base, base | (1 << v), base | (1 << u) | (1 << v), base | (1 << u)};
      }
    }
  }
  for (int cs = 0; cs < 256; ++cs) {
    auto inside = [&](int c) { return (cs >> c) & 1; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& face : faces) {
      // Walking the face, an exit leaves the inside region and an enter returns.
      for (int m = 0; m < 4; ++m) {
        if (!inside(face[m]) || inside(face[(m + 1) % 4])) continue;
        const int exit = edge_between(t.edges, face[m], face[(m + 1) % 4]);
        int back = m;
        while (inside(face[(back + 3) % 4])) back = (back + 3) % 4;
        if (back == (m + 1) % 4) continue;
        const int enter = edge_between(t.edges, face[(back + 3) % 4], face[back]);
        next[exit] = enter;
      }
    }
    std::array<bool, 12> used{};
    for (int e = 0; e < 12; ++e) {
      if (used[e] || next[e] < 0) continue;
      std::vector<int> loop;
      for (int cur = e; !used[cur]; cur = next[cur]) {
        loop.push_back(cur);
        used[cur] = true;
      }
      const int len = static_cast<int>(loop.size());
      int start = -1;
      for (int s0 = 0; s0 < len && start < 0; ++s0) {
        bool ok = true;
        for (int m = 2; m + 1 < len && ok; ++m) {
          ok = !share_face(t.edges[loop[s0]], t.edges[loop[(s0 + m) % len]]);
        }
        if (ok) start = s0;
      }
      std::rotate(loop.begin(), loop.begin() + std::max(start, 0), loop.end());
      t.loops[cs].push_back(std::move(loop));
      t.center_fan[cs].push_back(start < 0);
    }
  }
  return t;
}

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

}  // namespace

TriMesh marching_cubes(const ScalarGrid& field, double iso, std::span<const std::uint8_t> mask) {
  const auto& tb = tables();
  const auto [nx, ny, nz] = field.dims;
  if (field.values.size() != field.count()) throw Error("densify", "field size mismatch");
  if (!mask.empty() && mask.size() != field.count()) throw Error("densify", "mask size mismatch");
  TriMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> vertex_of_edge;
  const double h = field.h;
  auto node_pos = [&](int i, int j, int k) {
    return Vec3(field.origin.x() + (i + 0.5) * h, field.origin.y() + (j + 0.5) * h,
                field.origin.z() + (k + 0.5) * h);
  };
  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        const std::size_t base = field.index(i, j, k);
        if (!mask.empty() && !mask[base]) continue;
        std::array<double, 8> v{};
        int cs = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = field.values[field.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))];
          if (v[c] > iso) cs |= 1 << c;
        }
        if (cs == 0 || cs == 255) continue;
        auto vertex = [&](int e) {
          const Edge& ed = tb.edges[e];
          const int ai = i + (ed.a & 1), aj = j + ((ed.a >> 1) & 1), ak = k + ((ed.a >> 2) & 1);
          const std::uint64_t key = static_cast<std::uint64_t>(field.index(ai, aj, ak)) * 3 + ed.axis;
          auto [it, fresh] = vertex_of_edge.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
          if (fresh) {
            const double va = v[ed.a], vb = v[ed.b];
            const double s = std::clamp((iso - va) / (vb - va), 0.0, 1.0);
            const Vec3 pa = node_pos(ai, aj, ak);
            Vec3 pb = pa;
            pb[ed.axis] += h;
            mesh.vertices.push_back(pa + s * (pb - pa));
          }
          return it->second;
        };
        auto emit = [&](std::array<std::uint32_t, 3> tri) {
          const Vec3& p0 = mesh.vertices[tri[0]];
          const Vec3 nrm = (mesh.vertices[tri[1]] - p0).cross(mesh.vertices[tri[2]] - p0);
          if (nrm.norm() <= 1e-12 * h * h) return;
          std::swap(tri[1], tri[2]);
          mesh.triangles.push_back(tri);
        };
        for (std::size_t li = 0; li < tb.loops[cs].size(); ++li) {
          const auto& loop = tb.loops[cs][li];
          std::vector<std::uint32_t> ids;
          ids.reserve(loop.size());
          for (int e : loop) ids.push_back(vertex(e));
          if (!tb.center_fan[cs][li]) {
            for (std::size_t m = 1; m + 1 < ids.size(); ++m) emit({ids[0], ids[m], ids[m + 1]});
            continue;
          }
          Vec3 c = Vec3::Zero();
          for (auto id : ids) c += mesh.vertices[id];
          const auto ci = static_cast<std::uint32_t>(mesh.vertices.size());
          mesh.vertices.push_back(c / static_cast<double>(ids.size()));
          for (std::size_t m = 0; m < ids.size(); ++m) emit({ci, ids[m], ids[(m + 1) % ids.size()]});
        }
      }
    }
  }
  return mesh;
}

}  // namespace parkocc::densify
