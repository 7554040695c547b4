#pragma once

#include <map>
#include <vector>

#include "parkocc/densify/pipeline.hpp"
#include "parkocc/occ/grid.hpp"
#include "parkocc/stitch/cloud.hpp"

namespace parkocc::occ {

struct GtConfig {
  GridSpec grid{};
  densify::DensifyConfig densify{};
  double split_margin = stitch::kSplitMargin;

  /// Poisson cell and mesh sampling step at half the voxel size.
  static GtConfig for_grid(const GridSpec& grid);
  void validate() const;
};

/// Dense surface samples: static scene in world, objects in their own frames.
struct DenseScene {
  std::vector<Vec3> static_world;
  std::map<int, std::vector<Vec3>> objects;
};

DenseScene densify_scene(const stitch::AggregatedScene& agg, const GtConfig& cfg, int jobs = 1);

struct KeyframeGt {
  VoxelGrid gt;        // dense occupancy with transferred labels
  VoxelGrid semantic;  // labeled sparse points only
};

/// Dense occupancy = voxelized dense samples plus every fused sparse point;
/// labels come from the nearest voxel of the labeled fused points. Points
/// carrying kUnlabeled add occupancy but no semantics.
KeyframeGt keyframe_gt(const stitch::AggregatedScene& agg, const DenseScene& dense,
                       const stitch::KeyPose& key, const GridSpec& spec, int jobs = 1);

/// Whole chain for one sequence and one key index.
VoxelGrid build_dense_gt(const std::vector<stitch::FrameInput>& frames, std::size_t key_index,
                         const GtConfig& cfg, int jobs = 1);

}  // namespace parkocc::occ
