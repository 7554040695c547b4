#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "parkocc/occ/grid.hpp"

namespace parkocc::occ {

// Grid container, all fields little-endian:
//   char[4]  "OCCG"
//   u32      version (1)
//   f64[3]   origin
//   f64      voxel_size
//   i32[3]   dims
//   u64      run count, then u32 run lengths over the linear index order,
//            alternating free / occupied and starting with a (possibly empty) free run
//   u64      occupied count, then one label byte per occupied voxel in index order
inline constexpr std::uint32_t kGridFormatVersion = 1;

std::vector<char> encode_grid(const VoxelGrid& g);
/// Throws IoError naming the defect on malformed input.
VoxelGrid decode_grid(std::span<const char> bytes);

void write_grid(const VoxelGrid& g, const std::filesystem::path& path);
VoxelGrid read_grid(const std::filesystem::path& path);

/// RGB display color of a nuScenes tag; unknown tags are gray.
std::array<std::uint8_t, 3> class_color(std::uint8_t tag);

/// ASCII PLY with one colored vertex per occupied voxel center.
void write_grid_ply(const VoxelGrid& g, const std::filesystem::path& path);

}  // namespace parkocc::occ
