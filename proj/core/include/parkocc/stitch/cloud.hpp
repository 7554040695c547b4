#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "parkocc/geom/pose.hpp"
#include "parkocc/sim/lidar.hpp"

namespace parkocc::stitch {

using geom::PoseSE3;
using geom::Vec3;

/// Points with nuScenes labels in one frame. Each point also remembers the
/// sensor origin it was observed from (view index into `viewpoints`, same
/// frame as the points) so normals can be oriented after aggregation.
struct LabeledCloud {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint32_t> view;
  std::vector<Vec3> viewpoints;
  geom::FrameId frame = geom::WorldFrame{};

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  /// Throws parkocc::Error when the parallel arrays disagree.
  void check() const;

  void push_back(const Vec3& p, std::uint8_t label, std::uint32_t view_index) {
    points.push_back(p);
    labels.push_back(label);
    view.push_back(view_index);
  }
};

/// Cloud in the sensor frame with mapped labels and a single viewpoint at the origin.
LabeledCloud from_scan(const sim::SemanticScan& scan, const std::string& sensor_name = "LIDAR_TOP");

/// Points and viewpoints mapped through `pose`; labels untouched.
LabeledCloud transform_cloud(const LabeledCloud& c, const PoseSE3& pose, geom::FrameId frame);

/// Appends src to dst, re-basing view indices.
void append(LabeledCloud& dst, const LabeledCloud& src);

/// Oriented box (yaw-only in practice) in the frame of the cloud it is used with.
struct ObjectBox {
  int object_index = -1;
  Vec3 half_extents = Vec3::Zero();
  PoseSE3 pose;
};

bool box_contains(const ObjectBox& box, const Vec3& p, double margin);

struct FrameSegments {
  LabeledCloud static_part;
  std::map<int, LabeledCloud> dynamic_parts;
};

inline constexpr double kSplitMargin = 0.05;  // meters

/// Each point goes to the first box (lowest object index) containing it with
/// the box inflated by `margin`; the rest is static. Boxes must be expressed
/// in the scan's frame.
FrameSegments split_static_dynamic(const LabeledCloud& scan, std::vector<ObjectBox> boxes,
                                   double margin = kSplitMargin);

/// One frame of a sequence. Box poses are in the world frame at scan time.
struct FrameInput {
  LabeledCloud scan;  // sensor frame
  PoseSE3 ego_pose;
  PoseSE3 sensor_pose;  // sensor in ego
  std::vector<ObjectBox> boxes;
};

struct AggregatedScene {
  LabeledCloud static_world;               // world frame
  std::map<int, LabeledCloud> objects;     // object-canonical frames
  std::map<int, Vec3> half_extents;
};

/// Static points to world, object points to their box frame at their own
/// scan time, concatenated in (frame, point) order.
AggregatedScene aggregate_sequence(const std::vector<FrameInput>& frames, double margin = kSplitMargin);

/// Where the keyframe is: ego and sensor pose plus world box poses at key time.
struct KeyPose {
  PoseSE3 ego_pose;
  PoseSE3 sensor_pose;
  std::map<int, PoseSE3> box_poses;
  std::string sample_token;
};

/// World static points and posed objects expressed in the key LiDAR frame.
/// Objects without a key-time pose are dropped.
LabeledCloud fuse_to_frame(const AggregatedScene& agg, const KeyPose& key);

}  // namespace parkocc::stitch
