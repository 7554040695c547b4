#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "parkocc/geom/pose.hpp"

namespace parkocc::occ {

using geom::PoseSE3;
using geom::Vec3;

using Index3 = std::array<int, 3>;

/// Label stored on occupied voxels whose points carried no semantic tag.
inline constexpr std::uint8_t kUnlabeled = 255;

/// Regular lattice over an axis-aligned box in some frame (normally the
/// keyframe lidar frame). Linear index = i + nx * (j + ny * k).
struct GridSpec {
  Vec3 origin = Vec3(-25.6, -25.6, -2.1);
  double voxel_size = 0.2;
  Index3 dims = {256, 256, 32};

  static GridSpec default_spec() { return {}; }

  void validate() const;

  std::size_t count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::size_t linear(const Index3& c) const { return linear(c[0], c[1], c[2]); }
  Index3 unravel(std::size_t idx) const;

  bool in_bounds(const Index3& c) const {
    return c[0] >= 0 && c[1] >= 0 && c[2] >= 0 && c[0] < dims[0] && c[1] < dims[1] &&
           c[2] < dims[2];
  }

  /// Cell containing p under half-open cells [o + i s, o + (i+1) s); points
  /// within 1e-9 cells of a face are snapped onto it first so exact face
  /// coordinates land in the upper cell deterministically.
  Index3 cell_of(const Vec3& p) const;
  std::optional<Index3> locate(const Vec3& p) const;

  Vec3 center(int i, int j, int k) const {
    return origin + voxel_size * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 center(const Index3& c) const { return center(c[0], c[1], c[2]); }
  Vec3 max_corner() const {
    return origin + voxel_size * Vec3(dims[0], dims[1], dims[2]);
  }

  bool operator==(const GridSpec& o) const {
    return origin == o.origin && voxel_size == o.voxel_size && dims == o.dims;
  }
};

/// Occupancy flags plus a semantic tag per voxel. The label of a free voxel
/// is kept at 0 and never read.
struct VoxelGrid {
  GridSpec spec;
  std::vector<std::uint8_t> occupied;
  std::vector<std::uint8_t> label;

  VoxelGrid() = default;
  explicit VoxelGrid(const GridSpec& s)
      : spec(s), occupied(s.count(), 0), label(s.count(), 0) {}

  bool is_occupied(std::size_t idx) const { return occupied[idx] != 0; }
  void set(std::size_t idx, std::uint8_t tag) {
    occupied[idx] = 1;
    label[idx] = tag;
  }
  void clear(std::size_t idx) {
    occupied[idx] = 0;
    label[idx] = 0;
  }

  std::size_t occupied_count() const;
  std::vector<std::size_t> occupied_indices() const;

  bool operator==(const VoxelGrid& o) const {
    return spec == o.spec && occupied == o.occupied && label == o.label;
  }
};

}  // namespace parkocc::occ
