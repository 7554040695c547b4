#include "parkocc/densify/pipeline.hpp"

#include <cmath>
#include <limits>

#include "parkocc/error.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::densify {

void TileConfig::validate() const {
  if (!(size > 0)) throw ConfigError("tile size must be positive");
  if (overlap < 0) throw ConfigError("tile overlap must be >= 0");
}

void DensifyConfig::validate() const {
  poisson.validate();
  tiles.validate();
  if (normal_k < 3) throw ConfigError("normal_k must be >= 3");
  if (!(max_edge > 0)) throw ConfigError("max_edge must be positive");
}

TriMesh reconstruct_tiled(const OrientedPointCloud& cloud, const PoissonConfig& poisson,
                          const TileConfig& tiles, int jobs) {
  tiles.validate();
  TriMesh out;
  if (cloud.points.empty()) return out;
  Vec3 lo = cloud.points.front(), hi = lo;
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const int tx = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / tiles.size)));
  const int ty = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / tiles.size)));
  const std::size_t n_tiles = static_cast<std::size_t>(tx) * ty;

  std::vector<TriMesh> parts(n_tiles);
  // Tiles share the worker pool; each solve is sequential.
  util::parallel_for(n_tiles, jobs, [&](std::size_t t) {
    const int ix = static_cast<int>(t % tx), iy = static_cast<int>(t / tx);
    const double x0 = lo.x() + ix * tiles.size, y0 = lo.y() + iy * tiles.size;
    const double x1 = ix + 1 == tx ? std::numeric_limits<double>::infinity() : x0 + tiles.size;
    const double y1 = iy + 1 == ty ? std::numeric_limits<double>::infinity() : y0 + tiles.size;
    const double cx0 = ix == 0 ? -std::numeric_limits<double>::infinity() : x0;
    const double cy0 = iy == 0 ? -std::numeric_limits<double>::infinity() : y0;
    OrientedPointCloud sub;
    std::size_t usable = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const Vec3& p = cloud.points[i];
      if (p.x() < x0 - tiles.overlap || p.x() >= x1 + tiles.overlap || p.y() < y0 - tiles.overlap ||
          p.y() >= y1 + tiles.overlap) {
        continue;
      }
      sub.points.push_back(p);
      sub.normals.push_back(cloud.normals[i]);
      const double c = cloud.confidence.empty() ? 1.0 : cloud.confidence[i];
      sub.confidence.push_back(c);
      if (c >= poisson.min_confidence) ++usable;
    }
    if (usable < std::max<std::size_t>(tiles.min_points, 50)) return;
    const TriMesh mesh = poisson_reconstruct(sub, poisson);
    TriMesh& keep = parts[t];
    std::vector<std::int64_t> remap(mesh.vertices.size(), -1);
    for (const auto& tri : mesh.triangles) {
      const Vec3 c = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
      if (c.x() < cx0 || c.x() >= x1 || c.y() < cy0 || c.y() >= y1) continue;
      std::array<std::uint32_t, 3> nt{};
      for (int m = 0; m < 3; ++m) {
        auto& r = remap[tri[m]];
        if (r < 0) {
          r = static_cast<std::int64_t>(keep.vertices.size());
          keep.vertices.push_back(mesh.vertices[tri[m]]);
        }
        nt[m] = static_cast<std::uint32_t>(r);
      }
      keep.triangles.push_back(nt);
    }
  });
  for (const auto& p : parts) out.append(p);
  return out;
}

std::vector<Vec3> densify_cloud(const stitch::LabeledCloud& cloud, const DensifyConfig& cfg, int jobs) {
  cfg.validate();
  const double cell = cfg.downsample > 0 ? cfg.downsample : cfg.poisson.cell_size;
  const stitch::LabeledCloud ds = cell > 0 ? voxel_downsample(cloud, cell) : cloud;
  if (ds.size() < static_cast<std::size_t>(cfg.normal_k) + 1) return cloud.points;
  const OrientedPointCloud oriented = estimate_normals(ds, cfg.normal_k, jobs);
  std::size_t usable = 0;
  for (double c : oriented.confidence) usable += c >= cfg.poisson.min_confidence ? 1 : 0;
  if (usable < 50) return cloud.points;
  const TriMesh mesh = reconstruct_tiled(oriented, cfg.poisson, cfg.tiles, jobs);
  return densify_mesh(mesh, cfg.max_edge);
}

}  // namespace parkocc::densify
