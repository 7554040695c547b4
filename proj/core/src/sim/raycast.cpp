#include "parkocc/sim/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parkocc/error.hpp"

namespace parkocc::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BoxHit {
  double t;
  double incidence;
};

// Slab test in the box frame. Returns the entry distance when the ray starts
// outside the box and enters it at t > 0.
std::optional<BoxHit> intersect_box(const SceneSnapshot::Box& b, const Vec3& o, const Vec3& d) {
  Vec3 lo = o - b.center;
  Vec3 ld = d;
  if (!b.axis_aligned) {
    const double x = b.cos_yaw * lo.x() + b.sin_yaw * lo.y();
    const double y = -b.sin_yaw * lo.x() + b.cos_yaw * lo.y();
    lo.x() = x;
    lo.y() = y;
    const double dx = b.cos_yaw * d.x() + b.sin_yaw * d.y();
    const double dy = -b.sin_yaw * d.x() + b.cos_yaw * d.y();
    ld.x() = dx;
    ld.y() = dy;
  }
  double tnear = -kInf, tfar = kInf;
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    const double h = b.half[a];
    if (ld[a] == 0.0) {
      if (lo[a] < -h || lo[a] > h) return std::nullopt;
      continue;
    }
    const double inv = 1.0 / ld[a];
    double t1 = (-h - lo[a]) * inv;
    double t2 = (h - lo[a]) * inv;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > tnear) {
      tnear = t1;
      axis = a;
    }
    tfar = std::min(tfar, t2);
    if (tfar < tnear) return std::nullopt;
  }
  if (axis < 0 || tnear <= 0.0) return std::nullopt;
  return BoxHit{tnear, std::min(1.0, std::abs(ld[axis]))};
}

}  // namespace

SceneSnapshot::SceneSnapshot(const SceneModel& scene, double t) : time_(t) {
  for (const auto& o : scene.objects()) {
    if (o.is_plane()) {
      planes_.push_back({o.index, o.source_tag, o.pose.translation().z(),
                         o.kind == ObjectKind::Floor});
      continue;
    }
    const PoseSE3 pose = object_pose_at(scene, o.index, t);
    Box b{};
    b.index = o.index;
    b.tag = o.source_tag;
    b.center = pose.translation();
    b.half = o.half_extents;
    b.cos_yaw = pose.rotation()(0, 0);
    b.sin_yaw = pose.rotation()(1, 0);
    b.axis_aligned = (b.sin_yaw == 0.0 && b.cos_yaw == 1.0);
    const double ex = std::abs(b.cos_yaw) * b.half.x() + std::abs(b.sin_yaw) * b.half.y();
    const double ey = std::abs(b.sin_yaw) * b.half.x() + std::abs(b.cos_yaw) * b.half.y();
    b.aabb_lo = b.center - Vec3(ex, ey, b.half.z());
    b.aabb_hi = b.center + Vec3(ex, ey, b.half.z());
    boxes_.push_back(b);
  }
  build_grid();
}

void SceneSnapshot::build_grid() {
  if (boxes_.empty()) return;
  Vec3 lo = boxes_.front().aabb_lo, hi = boxes_.front().aabb_hi;
  for (const auto& b : boxes_) {
    lo = lo.cwiseMin(b.aabb_lo);
    hi = hi.cwiseMax(b.aabb_hi);
  }
  cell_ = 2.0;
  const double span = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  if (span / cell_ > 512.0) cell_ = span / 512.0;
  grid_lo_ = lo;
  gx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell_)));
  gy_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell_)));
  cells_.assign(static_cast<std::size_t>(gx_) * gy_, {});
  for (std::size_t bi = 0; bi < boxes_.size(); ++bi) {
    const auto& b = boxes_[bi];
    const int x0 = std::clamp(static_cast<int>(std::floor((b.aabb_lo.x() - lo.x()) / cell_)), 0, gx_ - 1);
    const int x1 = std::clamp(static_cast<int>(std::floor((b.aabb_hi.x() - lo.x()) / cell_)), 0, gx_ - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor((b.aabb_lo.y() - lo.y()) / cell_)), 0, gy_ - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor((b.aabb_hi.y() - lo.y()) / cell_)), 0, gy_ - 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        cells_[static_cast<std::size_t>(y) * gx_ + x].push_back(static_cast<int>(bi));
      }
    }
  }
}

std::optional<RayHit> SceneSnapshot::cast(const Vec3& o, const Vec3& d, double max_range) const {
  double best_t = max_range;
  int best_box = -1;
  int best_plane = -1;
  double best_inc = 0.0;

  for (std::size_t i = 0; i < planes_.size(); ++i) {
    const auto& p = planes_[i];
    // Floors are only visible from above and ceilings from below.
    if (p.is_floor ? (d.z() < 0.0 && o.z() > p.z) : (d.z() > 0.0 && o.z() < p.z)) {
      const double t = (p.z - o.z()) / d.z();
      if (t > 0.0 && t <= best_t) {
        best_t = t;
        best_plane = static_cast<int>(i);
        best_box = -1;
        best_inc = std::min(1.0, std::abs(d.z()));
      }
    }
  }

  if (!boxes_.empty()) {
    // Clip the ray to the bucket grid footprint.
    const double gx_hi = grid_lo_.x() + gx_ * cell_;
    const double gy_hi = grid_lo_.y() + gy_ * cell_;
    double t0 = 0.0, t1 = best_t;
    auto clip = [&](double oc, double dc, double lo, double hi) {
      if (dc == 0.0) {
        if (oc < lo || oc > hi) t1 = -1.0;
        return;
      }
      double a = (lo - oc) / dc, b = (hi - oc) / dc;
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    };
    clip(o.x(), d.x(), grid_lo_.x(), gx_hi);
    clip(o.y(), d.y(), grid_lo_.y(), gy_hi);
    if (t0 <= t1) {
      const Vec3 p0 = o + t0 * d;
      int ix = std::clamp(static_cast<int>(std::floor((p0.x() - grid_lo_.x()) / cell_)), 0, gx_ - 1);
      int iy = std::clamp(static_cast<int>(std::floor((p0.y() - grid_lo_.y()) / cell_)), 0, gy_ - 1);
      const int sx = d.x() > 0 ? 1 : (d.x() < 0 ? -1 : 0);
      const int sy = d.y() > 0 ? 1 : (d.y() < 0 ? -1 : 0);
      auto next_boundary = [&](int i, int s, double oc, double dc, double lo) {
        if (s == 0) return kInf;
        const double edge = lo + (s > 0 ? (i + 1) : i) * cell_;
        return (edge - oc) / dc;
      };
      double tmx = next_boundary(ix, sx, o.x(), d.x(), grid_lo_.x());
      double tmy = next_boundary(iy, sy, o.y(), d.y(), grid_lo_.y());
      const double dtx = sx == 0 ? kInf : cell_ / std::abs(d.x());
      const double dty = sy == 0 ? kInf : cell_ / std::abs(d.y());
      while (true) {
        for (int bi : cells_[static_cast<std::size_t>(iy) * gx_ + ix]) {
          const auto& b = boxes_[static_cast<std::size_t>(bi)];
          if (auto h = intersect_box(b, o, d); h && h->t <= best_t) {
            if (h->t < best_t || best_box < 0 || b.index < boxes_[static_cast<std::size_t>(best_box)].index) {
              best_t = h->t;
              best_box = bi;
              best_plane = -1;
              best_inc = h->incidence;
            }
          }
        }
        const double t_exit = std::min(tmx, tmy);
        if (best_t <= t_exit || t_exit > t1) break;
        if (tmx < tmy) {
          ix += sx;
          tmx += dtx;
        } else {
          iy += sy;
          tmy += dty;
        }
        if (ix < 0 || iy < 0 || ix >= gx_ || iy >= gy_) break;
      }
    }
  }

  if (best_box < 0 && best_plane < 0) return std::nullopt;
  RayHit hit;
  hit.distance = best_t;
  hit.point = o + best_t * d;
  hit.incidence_cosine = best_inc;
  if (best_box >= 0) {
    hit.object_index = boxes_[static_cast<std::size_t>(best_box)].index;
    hit.semantic_tag = boxes_[static_cast<std::size_t>(best_box)].tag;
  } else {
    hit.object_index = planes_[static_cast<std::size_t>(best_plane)].index;
    hit.semantic_tag = planes_[static_cast<std::size_t>(best_plane)].tag;
  }
  return hit;
}

std::optional<RayHit> cast_ray(const SceneModel& scene, const Vec3& origin, const Vec3& dir,
                               double max_range, double t) {
  if (std::abs(dir.norm() - 1.0) > 1e-9) {
    throw Error("simworld", "cast_ray direction must be unit length");
  }
  return SceneSnapshot(scene, t).cast(origin, dir, max_range);
}

}  // namespace parkocc::sim
