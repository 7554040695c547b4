#include "parkocc/annotate/annotate.hpp"

#include <cmath>

#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/dataset/token.hpp"
#include "parkocc/error.hpp"

namespace parkocc::annotate {

BoxGeometry box_from_object(const sim::SceneModel& scene, int object_index, double t) {
  const auto& o = scene.object(object_index);
  if (o.is_plane()) throw Error("annotate", "planes have no bounding box");
  const PoseSE3 pose = sim::object_pose_at(scene, object_index, t);
  BoxGeometry b;
  b.center = pose.translation();
  b.size = Vec3(2.0 * o.half_extents.y(), 2.0 * o.half_extents.x(), 2.0 * o.half_extents.z());
  b.yaw = pose.yaw_deg();
  return b;
}

int visibility_level(int visible_count) {
  if (visible_count <= 1) return 1;
  if (visible_count == 2) return 2;
  if (visible_count == 3) return 3;
  return 4;
}

std::array<Vec3, 5> visibility_targets(const sim::SceneModel& scene, int object_index, double t) {
  const auto& o = scene.object(object_index);
  if (o.is_plane() || !(o.half_extents.x() > 0 && o.half_extents.y() > 0)) {
    throw Error("annotate", "degenerate visibility target " + std::to_string(object_index));
  }
  const PoseSE3 pose = sim::object_pose_at(scene, object_index, t);
  const double ex = o.half_extents.x(), ey = o.half_extents.y();
  return {pose.apply(Vec3(0, 0, 0)), pose.apply(Vec3(ex, 0, 0)), pose.apply(Vec3(-ex, 0, 0)),
          pose.apply(Vec3(0, ey, 0)), pose.apply(Vec3(0, -ey, 0))};
}

VisibilityResult compute_visibility(const sim::SceneSnapshot& snapshot, const sim::SceneModel& scene,
                                    const PoseSE3& ego_pose, int target_index,
                                    const PoseSE3& sensor_in_ego) {
  const Vec3 origin = geom::chain_to_world(sensor_in_ego, ego_pose).translation();
  const auto targets = visibility_targets(scene, target_index, snapshot.time());
  VisibilityResult r;
  for (const Vec3& p : targets) {
    const Vec3 delta = p - origin;
    const double dist = delta.norm();
    if (dist <= kVisibilityEpsilon) {
      ++r.visible_count;
      continue;
    }
    const Vec3 dir = delta / dist;
    const auto hit = snapshot.cast(origin, dir, dist + kVisibilityEpsilon);
    if (hit && (hit->object_index == target_index ||
                std::abs(hit->distance - dist) <= kVisibilityEpsilon)) {
      ++r.visible_count;
    }
  }
  r.level = visibility_level(r.visible_count);
  return r;
}

VisibilityResult compute_visibility(const sim::SceneModel& scene, const PoseSE3& ego_pose,
                                    int target_index, double t, const PoseSE3& sensor_in_ego) {
  scene.object(target_index);
  return compute_visibility(sim::SceneSnapshot(scene, t), scene, ego_pose, target_index,
                            sensor_in_ego);
}

std::vector<int> annotated_objects(const sim::SceneModel& scene, bool include_static) {
  std::vector<int> out;
  for (const auto& o : scene.objects()) {
    if (o.is_vehicle() || (include_static && o.kind == sim::ObjectKind::Pillar)) {
      out.push_back(o.index);
    }
  }
  return out;
}

std::string instance_token(const std::string& scene_name, int object_index) {
  return dataset::generate_token("instance", scene_name + "/object-" + std::to_string(object_index));
}

std::vector<BoxAnnotation> annotate_keyframe(const sim::SceneModel& scene, const PoseSE3& ego_pose,
                                             const std::string& sample_token, double t,
                                             const std::string& scene_name,
                                             const AnnotateOptions& options) {
  const sim::SceneSnapshot snapshot(scene, t);
  std::vector<BoxAnnotation> out;
  for (int idx : annotated_objects(scene, options.include_static)) {
    const auto& o = scene.object(idx);
    BoxAnnotation a;
    a.box = box_from_object(scene, idx, t);
    a.rotation = geom::quaternion_from_rotation(sim::object_pose_at(scene, idx, t).rotation());
    a.object_index = idx;
    a.instance_token = instance_token(scene_name, idx);
    a.category_name = std::string(dataset::map_semantic_tag(o.source_tag).category_name);
    a.sample_token = sample_token;
    a.visibility = compute_visibility(snapshot, scene, ego_pose, idx, options.sensor_in_ego);
    a.visibility_token = std::to_string(a.visibility.level);
    a.moving = o.is_dynamic();
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace parkocc::annotate
