#pragma once

#include <array>
#include <string>
#include <vector>

#include "parkocc/sim/lidar.hpp"

namespace parkocc::annotate {

using geom::PoseSE3;
using geom::Vec3;

/// Box geometry in world coordinates. size = (w, l, h) with length along the
/// object x axis, width along y, height along z.
struct BoxGeometry {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();
  double yaw = 0.0;  // degrees
};

BoxGeometry box_from_object(const sim::SceneModel& scene, int object_index, double t);

struct VisibilityResult {
  int visible_count = 0;  // 0..5
  int level = 1;          // 1..4
};

/// {0,1} -> 1, 2 -> 2, 3 -> 3, {4,5} -> 4.
int visibility_level(int visible_count);

/// Footprint center and the four footprint edge midpoints, all at mid-height.
std::array<Vec3, 5> visibility_targets(const sim::SceneModel& scene, int object_index, double t);

inline constexpr double kVisibilityEpsilon = 0.01;  // meters

/// Casts one ray from the sensor origin to each target point. A ray counts
/// when its first hit is the target, or lands within kVisibilityEpsilon of the
/// target point.
VisibilityResult compute_visibility(const sim::SceneModel& scene, const PoseSE3& ego_pose,
                                    int target_index, double t,
                                    const PoseSE3& sensor_in_ego = sim::LidarSpec{}.mount);
VisibilityResult compute_visibility(const sim::SceneSnapshot& snapshot, const sim::SceneModel& scene,
                                    const PoseSE3& ego_pose, int target_index,
                                    const PoseSE3& sensor_in_ego = sim::LidarSpec{}.mount);

struct BoxAnnotation {
  BoxGeometry box;
  geom::QuatWXYZ rotation{1, 0, 0, 0};
  int object_index = -1;
  std::string instance_token;
  std::string category_name;
  std::string visibility_token;  // "1".."4"
  std::string sample_token;
  VisibilityResult visibility;
  bool moving = false;
};

struct AnnotateOptions {
  bool include_static = false;  // pillars as static.manmade instances
  PoseSE3 sensor_in_ego = sim::LidarSpec{}.mount;
};

/// Objects that receive annotations, in index order.
std::vector<int> annotated_objects(const sim::SceneModel& scene, bool include_static);

/// Instance token of an object, stable across the keyframes of one scene.
std::string instance_token(const std::string& scene_name, int object_index);

std::vector<BoxAnnotation> annotate_keyframe(const sim::SceneModel& scene, const PoseSE3& ego_pose,
                                             const std::string& sample_token, double t,
                                             const std::string& scene_name,
                                             const AnnotateOptions& options = {});

}  // namespace parkocc::annotate
