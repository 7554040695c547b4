#include "parkocc/occ/raytrace.hpp"

namespace parkocc::occ {

std::vector<std::uint8_t> observed_voxels(const GridSpec& spec, const Vec3& origin,
                                          std::span<const Vec3> hits) {
  spec.validate();
  std::vector<std::uint8_t> seen(spec.count(), 0);
  for (const auto& h : hits) {
    traverse_segment(spec, origin, h, [&](const Index3& c) {
      seen[spec.linear(c)] = 1;
      return true;
    });
  }
  return seen;
}

}  // namespace parkocc::occ
