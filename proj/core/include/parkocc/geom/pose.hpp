#pragma once

// Coordinate conventions shared by every module.
//
// All frames are x forward, y right, z up (left-handed, as in the source
// simulator). Positive yaw turns +x toward +y. Angles are degrees at the API
// boundary and radians internally. A rotation is assembled as
//   R = R3(roll) * R2(pitch) * R1(yaw)
// with R1 about z, R2 about y (positive pitch lifts +x toward +z) and R3 about
// x (positive roll lifts +y toward +z).

#include <array>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace parkocc::geom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle in degrees into [-180, 180].
double normalize_deg(double deg);

struct RotationRPY {
  double roll = 0.0;   // degrees
  double pitch = 0.0;  // degrees
  double yaw = 0.0;    // degrees

  RotationRPY normalized() const;
};

/// Unit quaternion in (w, x, y, z) order, the layout used by the dataset tables.
using QuatWXYZ = std::array<double, 4>;

Mat3 rotation_from_rpy(const RotationRPY& rpy);

/// Inverse of rotation_from_rpy for well-conditioned pitch (|pitch| < 90).
RotationRPY rpy_from_rotation(const Mat3& r);

QuatWXYZ quaternion_from_rotation(const Mat3& r);
Mat3 rotation_from_quaternion(const QuatWXYZ& q);

/// Rigid transform p -> R p + t.
class PoseSE3 {
 public:
  PoseSE3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  PoseSE3(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static PoseSE3 from_rpy(const RotationRPY& rpy, const Vec3& t) {
    return {rotation_from_rpy(rpy), t};
  }
  /// Planar pose: yaw in degrees, no roll or pitch.
  static PoseSE3 from_yaw(double yaw_deg, const Vec3& t) {
    return from_rpy({0.0, 0.0, yaw_deg}, t);
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }
  /// Inverse application without forming the inverse pose.
  Vec3 apply_inverse(const Vec3& p) const {
    return rotation_.transpose() * (p - translation_);
  }

  /// Heading of the rotated x axis projected on the xy plane, degrees.
  double yaw_deg() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// (a ∘ b)(p) = a(b(p)).
PoseSE3 pose_compose(const PoseSE3& a, const PoseSE3& b);
PoseSE3 pose_inverse(const PoseSE3& p);

std::vector<Vec3> transform_points(const PoseSE3& p, std::span<const Vec3> pts);

/// Sensor -> world through the ego frame: ego_pose_in_world ∘ sensor_pose_in_ego.
PoseSE3 chain_to_world(const PoseSE3& sensor_pose_in_ego,
                       const PoseSE3& ego_pose_in_world);

/// Largest absolute entry difference between two poses (rotation and translation).
double pose_distance(const PoseSE3& a, const PoseSE3& b);

// Frame tags. Transforms are only defined along sensor -> ego -> world and
// world -> keyframe lidar; a sensor frame never maps to world directly.
struct SensorFrame {
  std::string name;
  bool operator==(const SensorFrame&) const = default;
};
struct EgoFrame {
  bool operator==(const EgoFrame&) const = default;
};
struct WorldFrame {
  bool operator==(const WorldFrame&) const = default;
};
struct KeyframeLidarFrame {
  std::string sample_token;
  bool operator==(const KeyframeLidarFrame&) const = default;
};
/// Canonical (box-local) frame of one object.
struct ObjectFrame {
  int object_index = -1;
  bool operator==(const ObjectFrame&) const = default;
};

using FrameId = std::variant<SensorFrame, EgoFrame, WorldFrame, KeyframeLidarFrame, ObjectFrame>;

std::string to_string(const FrameId& f);

}  // namespace parkocc::geom
