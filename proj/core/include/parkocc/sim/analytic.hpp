#pragma once

#include "parkocc/occ/grid.hpp"
#include "parkocc/sim/scene.hpp"

namespace parkocc::sim {

/// Ground-truth occupancy straight from the scene solids. A voxel is occupied
/// iff its center (mapped through grid_to_world) lies inside a solid at time t.
/// When several solids contain it, cars beat structure beat floor, then the
/// lower object index wins. Labels are nuScenes tags.
occ::VoxelGrid analytic_occupancy(const SceneModel& scene, const occ::GridSpec& grid, double t,
                                  const PoseSE3& grid_to_world = PoseSE3::identity());

/// Same resolution rules, also reporting the winning object index per voxel
/// (-1 where free).
occ::VoxelGrid analytic_occupancy(const SceneModel& scene, const occ::GridSpec& grid, double t,
                                  const PoseSE3& grid_to_world, std::vector<int>* object_index);

}  // namespace parkocc::sim
