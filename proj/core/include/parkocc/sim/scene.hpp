#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parkocc/geom/pose.hpp"

namespace parkocc::sim {

using geom::PoseSE3;
using geom::Vec3;

struct SceneConfig {
  std::uint64_t seed = 1;
  double lot_width = 40.0;   // along world x, meters
  double lot_length = 60.0;  // along world y, meters
  double ceiling_height = 3.2;
  double pillar_spacing = 8.0;
  double pillar_cross_section = 0.6;
  double parked_car_density = 0.5;
  int dynamic_car_count = 2;
  double scene_duration = 20.0;  // seconds
  double fixed_dt = 0.1;         // seconds
  double wall_thickness = 0.3;
  double vehicle_speed = 2.5;  // m/s, shared by the ego and the moving cars

  void validate() const;
};

enum class ObjectKind { Floor, Ceiling, Wall, Pillar, ParkedCar, DynamicCar, StaticBox };

std::string to_string(ObjectKind k);

/// Priority when several solids contain one point: cars over structure over floor.
int occupancy_rank(ObjectKind k);

struct Waypoint {
  double time = 0.0;
  PoseSE3 pose;
};

/// Time-stamped planar poses. Queries interpolate position linearly and yaw
/// along the shorter arc.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Waypoint> waypoints);

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  double start_time() const { return waypoints_.front().time; }
  double end_time() const { return waypoints_.back().time; }
  bool empty() const { return waypoints_.empty(); }

  /// Throws parkocc::Error when t lies outside [start, end] (1e-9 slack).
  PoseSE3 pose_at(double t) const;

 private:
  std::vector<Waypoint> waypoints_;
};

/// Interpolates yaw (degrees) from a to b by fraction f along the shorter arc.
double interpolate_yaw_deg(double a, double b, double f);

/// One solid. Boxes are centered on `pose` with the given half extents in the
/// object frame (x = length axis, y = width axis, z = height axis). Floor and
/// ceiling are infinite horizontal slabs whose exposed face sits at
/// pose.translation().z(); the floor extends downward, the ceiling upward,
/// both by `slab_thickness`.
struct SceneObject {
  int index = -1;
  ObjectKind kind = ObjectKind::StaticBox;
  int source_tag = 0;
  Vec3 half_extents = Vec3::Zero();
  PoseSE3 pose;
  std::optional<Trajectory> trajectory;
  double slab_thickness = 0.5;

  bool is_plane() const { return kind == ObjectKind::Floor || kind == ObjectKind::Ceiling; }
  bool is_dynamic() const { return trajectory.has_value(); }
  bool is_vehicle() const {
    return kind == ObjectKind::ParkedCar || kind == ObjectKind::DynamicCar;
  }
};

/// Immutable-after-construction scene geometry. Object indices equal their
/// position in `objects()`.
class SceneModel {
 public:
  SceneModel() = default;

  int add_floor(double z = 0.0, int tag = 1);
  int add_ceiling(double z, int tag = 3);
  int add_box(ObjectKind kind, int tag, const Vec3& center, const Vec3& half_extents,
              double yaw_deg = 0.0);
  int add_dynamic_box(int tag, const Vec3& half_extents, Trajectory trajectory);

  const std::vector<SceneObject>& objects() const { return objects_; }
  const SceneObject& object(int index) const;
  bool has_object(int index) const {
    return index >= 0 && index < static_cast<int>(objects_.size());
  }

  void set_ego_trajectory(Trajectory t) { ego_trajectory_ = std::move(t); }
  const Trajectory& ego_trajectory() const { return ego_trajectory_; }

  void set_bounds(const Vec3& lo, const Vec3& hi) {
    bounds_lo_ = lo;
    bounds_hi_ = hi;
  }
  const Vec3& bounds_lo() const { return bounds_lo_; }
  const Vec3& bounds_hi() const { return bounds_hi_; }

  std::optional<SceneConfig> config;

  /// Copy of the scene with every object (and the ego trajectory) moved by `t`
  /// applied on the left. Intended for yaw-only rigid motions.
  SceneModel transformed(const PoseSE3& t) const;

  /// Copy without the given object; remaining objects are re-indexed.
  SceneModel without(int index) const;

 private:
  std::vector<SceneObject> objects_;
  Trajectory ego_trajectory_;
  Vec3 bounds_lo_ = Vec3::Constant(-1e9);
  Vec3 bounds_hi_ = Vec3::Constant(1e9);
};

/// Deterministic procedural lot: floor, ceiling, perimeter walls, a pillar
/// grid at pillar_spacing, parked cars in bays between pillar rows, moving
/// cars and the ego on a rounded loop through two drive aisles. Throws
/// ConfigError naming the violated constraint when the layout is infeasible.
SceneModel build_parking_lot(const SceneConfig& config);

/// Number of interior pillar positions along an axis of the given length.
int pillar_count_along(double length, double spacing);

PoseSE3 object_pose_at(const SceneModel& scene, int object_index, double t);

/// True when the two boxes' solid volumes intersect with positive volume.
bool boxes_overlap(const SceneObject& a, const SceneObject& b);

/// Containment test in the object's own frame; boundary inclusive within `tol`.
bool box_contains(const SceneObject& box, const PoseSE3& pose, const Vec3& p, double tol = 1e-9);

}  // namespace parkocc::sim
