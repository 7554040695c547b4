#pragma once

#include <vector>

#include "parkocc/densify/poisson.hpp"
#include "parkocc/stitch/cloud.hpp"

namespace parkocc::densify {

/// Square xy tiles; each tile is reconstructed from its core grown by
/// `overlap` and keeps the triangles whose centroid lies in the core.
struct TileConfig {
  double size = 12.8;
  double overlap = 2.0;
  std::size_t min_points = 50;  // tiles with fewer usable points are skipped

  void validate() const;
};

TriMesh reconstruct_tiled(const OrientedPointCloud& cloud, const PoissonConfig& poisson,
                          const TileConfig& tiles, int jobs = 1);

struct DensifyConfig {
  PoissonConfig poisson{};
  TileConfig tiles{};
  int normal_k = 10;
  double downsample = 0.0;  // <= 0: use the Poisson cell size
  double max_edge = 0.1;

  void validate() const;
};

/// Downsample, estimate normals toward each point's viewpoint, reconstruct in
/// tiles and sample the mesh at max_edge. Clouds too small for normal
/// estimation are returned unchanged.
std::vector<Vec3> densify_cloud(const stitch::LabeledCloud& cloud, const DensifyConfig& cfg, int jobs = 1);

}  // namespace parkocc::densify
