#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "parkocc/geom/pose.hpp"

namespace parkocc::densify {

using geom::Vec3;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  /// Throws parkocc::Error on out-of-range indices.
  void check() const;
  /// Appends another mesh, offsetting its indices.
  void append(const TriMesh& other);
};

/// Midpoint subdivision of every triangle until all of its edges are at most
/// max_edge, then the deduplicated vertex set (points closer than 1e-9 merge),
/// in first-seen order.
std::vector<Vec3> densify_mesh(const TriMesh& mesh, double max_edge);

/// Removes points that fall in the same 1e-9 quantization cell, keeping the first.
std::vector<Vec3> dedupe_points(std::span<const Vec3> pts, double quantum = 1e-9);

/// ASCII PLY with vertex and face lists.
void write_ply_mesh(const TriMesh& mesh, const std::filesystem::path& path);

/// ASCII PLY point cloud; colors optional (same length as points when given).
void write_ply_points(std::span<const Vec3> pts, std::span<const std::array<std::uint8_t, 3>> colors,
                      const std::filesystem::path& path);

}  // namespace parkocc::densify
