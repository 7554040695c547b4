#pragma once

#include <optional>
#include <vector>

#include "parkocc/sim/scene.hpp"

namespace parkocc::sim {

struct RayHit {
  Vec3 point = Vec3::Zero();  // frame of the caster (world for cast_ray)
  double distance = 0.0;
  double incidence_cosine = 0.0;  // |dir . surface normal|, in [0, 1]
  int object_index = -1;
  int semantic_tag = 0;  // source (simulator) tag
};

/// Scene geometry resolved at one instant, laid out for fast ray queries.
class SceneSnapshot {
 public:
  SceneSnapshot(const SceneModel& scene, double t);

  /// Nearest surface hit along origin + s * dir for s in (0, max_range].
  /// Boxes that contain the origin are skipped.
  std::optional<RayHit> cast(const Vec3& origin, const Vec3& dir, double max_range) const;

  struct Box {
    int index;
    int tag;
    Vec3 center;
    Vec3 half;
    double cos_yaw, sin_yaw;  // object x axis in world = (cos, sin, 0)
    bool axis_aligned;
    Vec3 aabb_lo, aabb_hi;
  };
  struct Plane {
    int index;
    int tag;
    double z;
    bool is_floor;
  };

  const std::vector<Box>& boxes() const { return boxes_; }
  const std::vector<Plane>& planes() const { return planes_; }
  double time() const { return time_; }

 private:
  void build_grid();

  std::vector<Box> boxes_;
  std::vector<Plane> planes_;
  double time_ = 0.0;

  // Uniform xy bucket grid over box footprints.
  Vec3 grid_lo_ = Vec3::Zero();
  double cell_ = 2.0;
  int gx_ = 0, gy_ = 0;
  std::vector<std::vector<int>> cells_;
};

/// Ray query against the scene at time t. `dir` must be unit length (1e-9).
std::optional<RayHit> cast_ray(const SceneModel& scene, const Vec3& origin, const Vec3& dir,
                               double max_range, double t);

}  // namespace parkocc::sim
