#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace parkocc::occ {

template <typename Fn>
void traverse_segment(const GridSpec& spec, const Vec3& from, const Vec3& to, Fn&& fn) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Vec3 d = to - from;
  // Clip to the grid box.
  double t0 = 0.0, t1 = 1.0;
  const Vec3 lo = spec.origin, hi = spec.max_corner();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (from[a] < lo[a] || from[a] >= hi[a]) return;
      continue;
    }
    double ta = (lo[a] - from[a]) / d[a], tb = (hi[a] - from[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return;
  const Vec3 start = from + t0 * d;
  const Vec3 end = from + t1 * d;
  Index3 c = spec.cell_of(start), last = spec.cell_of(end);
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(c[a], 0, spec.dims[a] - 1);
    last[a] = std::clamp(last[a], 0, spec.dims[a] - 1);
  }
  int step[3];
  double tmax[3], tdelta[3];
  for (int a = 0; a < 3; ++a) {
    step[a] = d[a] > 0 ? 1 : (d[a] < 0 ? -1 : 0);
    if (step[a] == 0) {
      tmax[a] = tdelta[a] = kInf;
      continue;
    }
    const double edge = spec.origin[a] + (c[a] + (step[a] > 0 ? 1 : 0)) * spec.voxel_size;
    tmax[a] = (edge - from[a]) / d[a];
    tdelta[a] = spec.voxel_size / std::abs(d[a]);
  }
  const int max_steps = spec.dims[0] + spec.dims[1] + spec.dims[2] + 3;
  for (int n = 0; n < max_steps; ++n) {
    if (!fn(c)) return;
    if (c == last) return;
    const int a = tmax[0] < tmax[1] ? (tmax[0] < tmax[2] ? 0 : 2) : (tmax[1] < tmax[2] ? 1 : 2);
    if (tmax[a] > t1) return;
    c[a] += step[a];
    if (c[a] < 0 || c[a] >= spec.dims[a]) return;
    tmax[a] += tdelta[a];
  }
}

}  // namespace parkocc::occ
