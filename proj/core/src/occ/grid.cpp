#include "parkocc/occ/grid.hpp"

#include <cmath>
#include <string>

#include "parkocc/error.hpp"

namespace parkocc::occ {

void GridSpec::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw ConfigError("grid voxel_size must be positive, got " + std::to_string(voxel_size));
  }
  for (int d : dims) {
    if (d < 1) throw ConfigError("grid dims must be >= 1 on every axis");
  }
  if (!origin.allFinite()) throw ConfigError("grid origin must be finite");
}

Index3 GridSpec::unravel(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

Index3 GridSpec::cell_of(const Vec3& p) const {
  Index3 c{};
  for (int a = 0; a < 3; ++a) {
    double u = (p[a] - origin[a]) / voxel_size;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-9) u = r;
    const double f = std::floor(u);
    // Clamp far-away points before the int conversion; they are out of range anyway.
    c[a] = f < -1.0 ? -1 : (f > 2e9 ? 2000000000 : static_cast<int>(f));
  }
  return c;
}

std::optional<Index3> GridSpec::locate(const Vec3& p) const {
  const Index3 c = cell_of(p);
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

std::size_t VoxelGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto o : occupied) n += (o != 0);
  return n;
}

std::vector<std::size_t> VoxelGrid::occupied_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    if (occupied[i]) out.push_back(i);
  }
  return out;
}

}  // namespace parkocc::occ
