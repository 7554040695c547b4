#pragma once

#include <span>

#include "parkocc/occ/grid.hpp"

namespace parkocc::occ {

/// Visits the voxels a segment passes through, in order (Amanatides-Woo).
/// Stops early when fn returns false.
template <typename Fn>
void traverse_segment(const GridSpec& spec, const Vec3& from, const Vec3& to, Fn&& fn);

/// Voxels crossed by rays from `origin` to each hit point, up to and
/// including the voxel of the hit.
std::vector<std::uint8_t> observed_voxels(const GridSpec& spec, const Vec3& origin,
                                          std::span<const Vec3> hits);

}  // namespace parkocc::occ

#include "parkocc/occ/raytrace_impl.hpp"
