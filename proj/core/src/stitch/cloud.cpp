#include "parkocc/stitch/cloud.hpp"

#include <algorithm>

#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/error.hpp"

namespace parkocc::stitch {

void LabeledCloud::check() const {
  if (labels.size() != points.size() || view.size() != points.size()) {
    throw Error("stitchfuse", "cloud arrays have different lengths");
  }
  for (auto v : view) {
    if (v >= viewpoints.size()) throw Error("stitchfuse", "cloud view index out of range");
  }
}

LabeledCloud from_scan(const sim::SemanticScan& scan, const std::string& sensor_name) {
  LabeledCloud c;
  c.frame = geom::SensorFrame{sensor_name};
  c.viewpoints.push_back(Vec3::Zero());
  c.points.reserve(scan.points.size());
  c.labels.reserve(scan.points.size());
  c.view.reserve(scan.points.size());
  for (const auto& p : scan.points) {
    c.push_back(p.hit.point, dataset::map_semantic_tag(p.hit.semantic_tag).nuscenes_tag, 0);
  }
  return c;
}

LabeledCloud transform_cloud(const LabeledCloud& c, const PoseSE3& pose, geom::FrameId frame) {
  LabeledCloud out;
  out.frame = std::move(frame);
  out.points = geom::transform_points(pose, c.points);
  out.viewpoints = geom::transform_points(pose, c.viewpoints);
  out.labels = c.labels;
  out.view = c.view;
  return out;
}

void append(LabeledCloud& dst, const LabeledCloud& src) {
  const auto base = static_cast<std::uint32_t>(dst.viewpoints.size());
  dst.viewpoints.insert(dst.viewpoints.end(), src.viewpoints.begin(), src.viewpoints.end());
  dst.points.insert(dst.points.end(), src.points.begin(), src.points.end());
  dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
  dst.view.reserve(dst.view.size() + src.view.size());
  for (auto v : src.view) dst.view.push_back(v + base);
}

bool box_contains(const ObjectBox& box, const Vec3& p, double margin) {
  const Vec3 local = box.pose.apply_inverse(p);
  return (local.cwiseAbs() - box.half_extents).maxCoeff() <= margin;
}

FrameSegments split_static_dynamic(const LabeledCloud& scan, std::vector<ObjectBox> boxes,
                                   double margin) {
  scan.check();
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const ObjectBox& a, const ObjectBox& b) { return a.object_index < b.object_index; });
  FrameSegments seg;
  seg.static_part.frame = scan.frame;
  seg.static_part.viewpoints = scan.viewpoints;
  for (const auto& b : boxes) {
    auto& part = seg.dynamic_parts[b.object_index];
    part.frame = scan.frame;
    part.viewpoints = scan.viewpoints;
  }
  // Bounding spheres cull most box tests.
  std::vector<double> radius2(boxes.size());
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const double r = (boxes[b].half_extents + Vec3::Constant(margin)).norm();
    radius2[b] = r * r;
  }
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Vec3& p = scan.points[i];
    LabeledCloud* dst = &seg.static_part;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if ((p - boxes[b].pose.translation()).squaredNorm() > radius2[b]) continue;
      if (box_contains(boxes[b], p, margin)) {
        dst = &seg.dynamic_parts[boxes[b].object_index];
        break;
      }
    }
    dst->push_back(p, scan.labels[i], scan.view[i]);
  }
  return seg;
}

AggregatedScene aggregate_sequence(const std::vector<FrameInput>& frames, double margin) {
  if (frames.empty()) throw Error("stitchfuse", "aggregate_sequence needs at least one frame");
  AggregatedScene agg;
  agg.static_world.frame = geom::WorldFrame{};
  for (const auto& f : frames) {
    const PoseSE3 sensor_world = geom::chain_to_world(f.sensor_pose, f.ego_pose);
    const PoseSE3 world_sensor = geom::pose_inverse(sensor_world);
    std::vector<ObjectBox> local_boxes;
    local_boxes.reserve(f.boxes.size());
    for (const auto& b : f.boxes) {
      local_boxes.push_back({b.object_index, b.half_extents, geom::pose_compose(world_sensor, b.pose)});
    }
    const FrameSegments seg = split_static_dynamic(f.scan, local_boxes, margin);
    append(agg.static_world, transform_cloud(seg.static_part, sensor_world, geom::WorldFrame{}));
    for (const auto& b : f.boxes) {
      const auto it = seg.dynamic_parts.find(b.object_index);
      if (it == seg.dynamic_parts.end()) continue;
      // sensor -> world -> object
      const PoseSE3 to_obj = geom::pose_compose(geom::pose_inverse(b.pose), sensor_world);
      auto& dst = agg.objects[b.object_index];
      dst.frame = geom::ObjectFrame{b.object_index};
      append(dst, transform_cloud(it->second, to_obj, geom::ObjectFrame{b.object_index}));
      agg.half_extents[b.object_index] = b.half_extents;
    }
  }
  return agg;
}

LabeledCloud fuse_to_frame(const AggregatedScene& agg, const KeyPose& key) {
  const PoseSE3 sensor_world = geom::chain_to_world(key.sensor_pose, key.ego_pose);
  const PoseSE3 world_sensor = geom::pose_inverse(sensor_world);
  const geom::FrameId frame = geom::KeyframeLidarFrame{key.sample_token};
  LabeledCloud out = transform_cloud(agg.static_world, world_sensor, frame);
  for (const auto& [idx, cloud] : agg.objects) {
    const auto it = key.box_poses.find(idx);
    if (it == key.box_poses.end()) continue;
    append(out, transform_cloud(cloud, geom::pose_compose(world_sensor, it->second), frame));
  }
  out.frame = frame;
  return out;
}

}  // namespace parkocc::stitch
