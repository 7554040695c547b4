#pragma once

#include <span>

#include "parkocc/occ/grid.hpp"
#include "parkocc/stitch/cloud.hpp"

namespace parkocc::occ {

/// Occupied iff at least one point falls in the half-open cell; label is the
/// majority label of the cell's points with ties going to the lowest tag.
/// Points outside the grid are dropped.
VoxelGrid voxelize(const stitch::LabeledCloud& cloud, const GridSpec& spec);
VoxelGrid voxelize(std::span<const Vec3> points, std::span<const std::uint8_t> labels, const GridSpec& spec);

/// Occupancy only; occupied voxels get kUnlabeled.
VoxelGrid voxelize_points(std::span<const Vec3> points, const GridSpec& spec);

/// Sets voxels occupied in `src` on `dst` (same spec); labels of newly set voxels come from src.
void merge_occupancy(VoxelGrid& dst, const VoxelGrid& src);

/// Each occupied voxel of `dense` takes the label of the nearest occupied
/// voxel of `semantic` (Euclidean distance between centers, ties to the lowest
/// linear index). Occupancy of `dense` is kept. Throws when `semantic` is
/// empty or the specs differ.
VoxelGrid nn_label_transfer(const VoxelGrid& dense, const VoxelGrid& semantic, int jobs = 1);

/// Stand-in prediction: the key-frame scan voxelized with its own labels.
VoxelGrid baseline_predict(const stitch::LabeledCloud& keyframe_scan, const GridSpec& spec);

}  // namespace parkocc::occ
