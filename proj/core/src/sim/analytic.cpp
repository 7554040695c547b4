#include "parkocc/sim/analytic.hpp"

#include <algorithm>
#include <cmath>

#include "parkocc/dataset/tagmap.hpp"

namespace parkocc::sim {

occ::VoxelGrid analytic_occupancy(const SceneModel& scene, const occ::GridSpec& grid, double t,
                                  const PoseSE3& grid_to_world) {
  return analytic_occupancy(scene, grid, t, grid_to_world, nullptr);
}

occ::VoxelGrid analytic_occupancy(const SceneModel& scene, const occ::GridSpec& grid, double t,
                                  const PoseSE3& grid_to_world, std::vector<int>* object_index) {
  grid.validate();
  occ::VoxelGrid out(grid);
  std::vector<int> owner(grid.count(), -1);
  std::vector<int> rank(grid.count(), 0);
  const auto& objs = scene.objects();

  auto claim = [&](std::size_t idx, const SceneObject& o) {
    const int r = occupancy_rank(o.kind);
    if (owner[idx] < 0 || r > rank[idx] || (r == rank[idx] && o.index < owner[idx])) {
      owner[idx] = o.index;
      rank[idx] = r;
    }
  };

  const auto [nx, ny, nz] = grid.dims;
  const PoseSE3 world_to_grid = geom::pose_inverse(grid_to_world);
  for (const auto& o : objs) {
    if (o.is_plane()) {
      for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
          for (int i = 0; i < nx; ++i) {
            const Vec3 w = grid_to_world.apply(grid.center(i, j, k));
            if (box_contains(o, o.pose, w)) claim(grid.linear(i, j, k), o);
          }
        }
      }
      continue;
    }
    const PoseSE3 pose = object_pose_at(scene, o.index, t);
    const PoseSE3 in_grid = geom::pose_compose(world_to_grid, pose);
    const Vec3 ext = in_grid.rotation().cwiseAbs() * o.half_extents;
    const Vec3 lo = in_grid.translation() - ext;
    const Vec3 hi = in_grid.translation() + ext;
    occ::Index3 a{}, b{};
    bool empty = false;
    for (int d = 0; d < 3; ++d) {
      // Centers c_i = origin + (i + 0.5) s inside [lo, hi].
      const double s = grid.voxel_size;
      a[d] = std::max(0, static_cast<int>(std::ceil((lo[d] - grid.origin[d]) / s - 0.5 - 1e-9)));
      b[d] = std::min(grid.dims[d] - 1,
                      static_cast<int>(std::floor((hi[d] - grid.origin[d]) / s - 0.5 + 1e-9)));
      if (a[d] > b[d]) empty = true;
    }
    if (empty) continue;
    for (int k = a[2]; k <= b[2]; ++k) {
      for (int j = a[1]; j <= b[1]; ++j) {
        for (int i = a[0]; i <= b[0]; ++i) {
          const Vec3 w = grid_to_world.apply(grid.center(i, j, k));
          if (box_contains(o, pose, w)) claim(grid.linear(i, j, k), o);
        }
      }
    }
  }

  for (std::size_t idx = 0; idx < owner.size(); ++idx) {
    if (owner[idx] < 0) continue;
    const auto& o = objs[static_cast<std::size_t>(owner[idx])];
    out.set(idx, dataset::map_semantic_tag(o.source_tag).nuscenes_tag);
  }
  if (object_index) *object_index = std::move(owner);
  return out;
}

}  // namespace parkocc::sim
