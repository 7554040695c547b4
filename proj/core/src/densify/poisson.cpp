#include "parkocc/densify/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "parkocc/error.hpp"

namespace parkocc::densify {

double ScalarGrid::sample(const Vec3& p) const {
  double f[3];
  int i0[3];
  for (int a = 0; a < 3; ++a) {
    double g = (p[a] - origin[a]) / h - 0.5;
    g = std::clamp(g, 0.0, static_cast<double>(dims[a] - 1));
    i0[a] = std::min(static_cast<int>(std::floor(g)), dims[a] - 2 < 0 ? 0 : dims[a] - 2);
    f[a] = g - i0[a];
  }
  double acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const int ii = std::min(i0[0] + dx, dims[0] - 1);
    const int jj = std::min(i0[1] + dy, dims[1] - 1);
    const int kk = std::min(i0[2] + dz, dims[2] - 1);
    const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
    acc += w * values[index(ii, jj, kk)];
  }
  return acc;
}

void PoissonConfig::validate() const {
  if (cell_size <= 0 && resolution < 8) throw ConfigError("poisson resolution must be >= 8");
  if (!(solver.tolerance > 0)) throw ConfigError("poisson tolerance must be positive");
  if (solver.max_iterations < 1) throw ConfigError("poisson max_iterations must be >= 1");
  if (padding < 0) throw ConfigError("poisson padding must be >= 0");
  if (trim_radius < 0) throw ConfigError("poisson trim_radius must be >= 0");
  if (smoothing < 0) throw ConfigError("poisson smoothing must be >= 0");
}

namespace {

// Staggered component lattice: dims d, node (I,J,K) at origin + h * (I,J,K) + shift.
struct FaceField {
  std::array<int, 3> d{};
  Vec3 shift = Vec3::Zero();
  std::vector<double> v;

  std::size_t at(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(d[0]) * (j + static_cast<std::size_t>(d[1]) * k);
  }

  void splat(const Vec3& local, double value) {
    int i0[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
      const double g = local[a] - shift[a];
      i0[a] = static_cast<int>(std::floor(g));
      f[a] = g - i0[a];
    }
    for (int c = 0; c < 8; ++c) {
      const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
      const int ii = std::clamp(i0[0] + dx, 0, d[0] - 1);
      const int jj = std::clamp(i0[1] + dy, 0, d[1] - 1);
      const int kk = std::clamp(i0[2] + dz, 0, d[2] - 1);
      const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
      v[at(ii, jj, kk)] += w * value;
    }
  }

  void smooth_axis(int axis) {
    std::vector<double> out(v.size());
    for (int k = 0; k < d[2]; ++k)
      for (int j = 0; j < d[1]; ++j)
        for (int i = 0; i < d[0]; ++i) {
          int idx[3] = {i, j, k};
          const double c = v[at(i, j, k)];
          idx[axis] = std::max(0, idx[axis] - 1);
          const double lo = v[at(idx[0], idx[1], idx[2])];
          idx[axis] = std::min(d[axis] - 1, (axis == 0 ? i : axis == 1 ? j : k) + 1);
          const double hi = v[at(idx[0], idx[1], idx[2])];
          out[at(i, j, k)] = 0.25 * lo + 0.5 * c + 0.25 * hi;
        }
    v.swap(out);
  }
};

}  // namespace

PoissonResult poisson_reconstruct_full(const OrientedPointCloud& cloud, const PoissonConfig& cfg) {
  cfg.validate();
  if (cloud.normals.size() != cloud.points.size() ||
      (!cloud.confidence.empty() && cloud.confidence.size() != cloud.points.size())) {
    throw Error("densify", "oriented cloud arrays have different lengths");
  }
  std::vector<std::size_t> use;
  use.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud.points[i].allFinite() || !cloud.normals[i].allFinite()) continue;
    if (!cloud.confidence.empty() && cloud.confidence[i] < cfg.min_confidence) continue;
    use.push_back(i);
  }
  if (use.size() < 50) {
    throw Error("densify", "poisson_reconstruct needs at least 50 oriented points, got " +
                               std::to_string(use.size()));
  }
  Vec3 lo = cloud.points[use[0]], hi = lo;
  for (auto i : use) {
    lo = lo.cwiseMin(cloud.points[i]);
    hi = hi.cwiseMax(cloud.points[i]);
  }
  const Vec3 ext = hi - lo;
  const Vec3 padded = ext * (1.0 + 2.0 * cfg.padding);
  double h = cfg.cell_size > 0 ? cfg.cell_size : padded.maxCoeff() / cfg.resolution;
  if (!(h > 0)) throw Error("densify", "degenerate point set: zero extent");

  PoissonResult res;
  ScalarGrid& chi = res.indicator;
  chi.h = h;
  for (int a = 0; a < 3; ++a) {
    const double span = std::max(padded[a], ext[a] + 4.0 * h);
    int n = static_cast<int>(std::ceil(span / h - 1e-9));
    n = std::max(16, (n + 15) / 16 * 16);
    chi.dims[a] = n;
  }
  chi.origin = 0.5 * (lo + hi) - 0.5 * h * Vec3(chi.dims[0], chi.dims[1], chi.dims[2]);
  if (chi.count() > cfg.max_cells) {
    throw Error("densify", "poisson grid of " + std::to_string(chi.count()) + " cells exceeds max_cells");
  }
  const auto [nx, ny, nz] = chi.dims;

  std::array<FaceField, 3> V;
  V[0] = {{nx + 1, ny, nz}, Vec3(0, 0.5, 0.5), {}};
  V[1] = {{nx, ny + 1, nz}, Vec3(0.5, 0, 0.5), {}};
  V[2] = {{nx, ny, nz + 1}, Vec3(0.5, 0.5, 0), {}};
  for (auto& f : V) f.v.assign(static_cast<std::size_t>(f.d[0]) * f.d[1] * f.d[2], 0.0);
  const double w = 1.0 / h;  // each sample stands for about one cell face of area h^2
  for (auto i : use) {
    const Vec3 local = (cloud.points[i] - chi.origin) / h;
    for (int a = 0; a < 3; ++a) V[a].splat(local, w * cloud.normals[i][a]);
  }
  for (int pass = 0; pass < cfg.smoothing; ++pass) {
    for (auto& f : V) {
      for (int a = 0; a < 3; ++a) f.smooth_axis(a);
    }
  }
  // No flux through the domain boundary keeps the Neumann problem consistent.
  for (int a = 0; a < 3; ++a) {
    auto& f = V[a];
    for (int k = 0; k < f.d[2]; ++k)
      for (int j = 0; j < f.d[1]; ++j)
        for (int i = 0; i < f.d[0]; ++i) {
          const int idx[3] = {i, j, k};
          if (idx[a] == 0 || idx[a] == f.d[a] - 1) f.v[f.at(i, j, k)] = 0.0;
        }
  }

  // -Lap(chi) = div(V): chi rises against the normals, i.e. toward the solid side.
  std::vector<double> b(chi.count());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        b[chi.index(i, j, k)] = (V[0].v[V[0].at(i + 1, j, k)] - V[0].v[V[0].at(i, j, k)] +
                                 V[1].v[V[1].at(i, j + 1, k)] - V[1].v[V[1].at(i, j, k)] +
                                 V[2].v[V[2].at(i, j, k + 1)] - V[2].v[V[2].at(i, j, k)]) /
                                h;
      }
  SolverOptions so = cfg.solver;
  so.boundary = Boundary::Neumann;
  res.stats = solve_poisson(chi.dims, h, b, chi.values, so);

  double iso = 0.0;
  for (auto i : use) iso += chi.sample(cloud.points[i]);
  iso /= static_cast<double>(use.size());
  res.iso_level = iso;

  // Keep the surface only near the samples.
  std::vector<std::uint8_t> mask(chi.count(), 0);
  for (auto i : use) {
    const Vec3 g = (cloud.points[i] - chi.origin) / h;
    const int ci = std::clamp(static_cast<int>(std::floor(g.x())), 0, nx - 1);
    const int cj = std::clamp(static_cast<int>(std::floor(g.y())), 0, ny - 1);
    const int ck = std::clamp(static_cast<int>(std::floor(g.z())), 0, nz - 1);
    mask[chi.index(ci, cj, ck)] = 1;
  }
  const int r = cfg.trim_radius;
  for (int axis = 0; axis < 3 && r > 0; ++axis) {
    std::vector<std::uint8_t> out(mask.size(), 0);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          if (!mask[chi.index(i, j, k)]) continue;
          int idx[3] = {i, j, k};
          const int c = idx[axis];
          for (int o = std::max(0, c - r); o <= std::min(chi.dims[axis] - 1, c + r); ++o) {
            idx[axis] = o;
            out[chi.index(idx[0], idx[1], idx[2])] = 1;
          }
        }
    mask.swap(out);
  }
  res.mesh = marching_cubes(chi, iso, mask);
  if (res.mesh.triangles.empty()) throw Error("densify", "empty iso-surface");
  return res;
}

TriMesh poisson_reconstruct(const OrientedPointCloud& cloud, const PoissonConfig& cfg) {
  return std::move(poisson_reconstruct_full(cloud, cfg).mesh);
}

}  // namespace parkocc::densify
