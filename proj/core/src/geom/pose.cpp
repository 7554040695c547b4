#include "parkocc/geom/pose.hpp"

#include <algorithm>
#include <cmath>

namespace parkocc::geom {

double normalize_deg(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a < -180.0) a += 360.0;
  return a;
}

RotationRPY RotationRPY::normalized() const {
  return {normalize_deg(roll), normalize_deg(pitch), normalize_deg(yaw)};
}

namespace {

Mat3 rot_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, -s, 0.0,
       s, c, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

Mat3 rot_y(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << c, 0.0, -s,
       0.0, 1.0, 0.0,
       s, 0.0, c;
  return m;
}

Mat3 rot_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Mat3 m;
  m << 1.0, 0.0, 0.0,
       0.0, c, -s,
       0.0, s, c;
  return m;
}

}  // namespace

Mat3 rotation_from_rpy(const RotationRPY& rpy) {
  const RotationRPY a = rpy.normalized();
  return rot_x(deg2rad(a.roll)) * rot_y(deg2rad(a.pitch)) * rot_z(deg2rad(a.yaw));
}

RotationRPY rpy_from_rotation(const Mat3& r) {
  // r = Rx(roll) Ry(pitch) Rz(yaw); read the angles off the closed form.
  //   r(0,0) = cp*cy, r(0,1) = -cp*sy, r(0,2) = -sp
  //   r(1,2) = -sr*cp, r(2,2) = cr*cp
  const double pitch = std::asin(std::clamp(-r(0, 2), -1.0, 1.0));
  const double yaw = std::atan2(-r(0, 1), r(0, 0));
  const double roll = std::atan2(-r(1, 2), r(2, 2));
  return {rad2deg(roll), rad2deg(pitch), rad2deg(yaw)};
}

QuatWXYZ quaternion_from_rotation(const Mat3& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

Mat3 rotation_from_quaternion(const QuatWXYZ& q) {
  Eigen::Quaterniond e(q[0], q[1], q[2], q[3]);
  e.normalize();
  return e.toRotationMatrix();
}

double PoseSE3::yaw_deg() const {
  return rad2deg(std::atan2(rotation_(1, 0), rotation_(0, 0)));
}

PoseSE3 pose_compose(const PoseSE3& a, const PoseSE3& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

PoseSE3 pose_inverse(const PoseSE3& p) {
  const Mat3 rt = p.rotation().transpose();
  return {rt, -(rt * p.translation())};
}

std::vector<Vec3> transform_points(const PoseSE3& p, std::span<const Vec3> pts) {
  std::vector<Vec3> out;
  out.reserve(pts.size());
  for (const auto& q : pts) out.push_back(p.apply(q));
  return out;
}

PoseSE3 chain_to_world(const PoseSE3& sensor_pose_in_ego, const PoseSE3& ego_pose_in_world) {
  return pose_compose(ego_pose_in_world, sensor_pose_in_ego);
}

double pose_distance(const PoseSE3& a, const PoseSE3& b) {
  const double dr = (a.rotation() - b.rotation()).cwiseAbs().maxCoeff();
  const double dt = (a.translation() - b.translation()).cwiseAbs().maxCoeff();
  return std::max(dr, dt);
}

std::string to_string(const FrameId& f) {
  struct Visitor {
    std::string operator()(const SensorFrame& s) const { return "sensor:" + s.name; }
    std::string operator()(const EgoFrame&) const { return "ego"; }
    std::string operator()(const WorldFrame&) const { return "world"; }
    std::string operator()(const KeyframeLidarFrame& k) const {
      return "keyframe_lidar:" + k.sample_token;
    }
    std::string operator()(const ObjectFrame& o) const {
      return "object:" + std::to_string(o.object_index);
    }
  };
  return std::visit(Visitor{}, f);
}

}  // namespace parkocc::geom
