#pragma once

#include <vector>

#include "parkocc/sim/raycast.hpp"

namespace parkocc::sim {

/// Spinning multi-beam LiDAR. Channel elevations are evenly spaced over
/// [vfov_lower, vfov_upper] including both ends; azimuth step k points at
/// k * 360 / azimuth_steps degrees, 0 along the sensor x axis.
struct LidarSpec {
  int channels = 64;
  double range = 80.0;            // meters
  double horizontal_fov = 360.0;  // degrees
  double vfov_lower = -30.0;      // degrees
  double vfov_upper = 10.0;       // degrees
  int azimuth_steps = 900;
  // The acquisition table lists yaw 90 for LIDAR_TOP; the mount defaults to 0.
  PoseSE3 mount = PoseSE3::from_translation(Vec3(0.0, 0.0, 2.0));

  void validate() const;

  double elevation_deg(int channel) const;
  double azimuth_deg(int step) const;
  /// Unit ray direction in the sensor frame.
  Vec3 direction(int channel, int step) const;
};

struct ScanPoint {
  RayHit hit;  // point in the sensor frame
  int channel = 0;
  int azimuth = 0;
};

struct SemanticScan {
  PoseSE3 sensor_in_ego;
  PoseSE3 sensor_in_world;
  double time = 0.0;  // seconds
  std::vector<ScanPoint> points;  // ordered by (channel, azimuth)
};

/// One sweep at time t. Misses produce no point. `jobs` splits channels over
/// threads; the result does not depend on it.
SemanticScan simulate_scan(const SceneModel& scene, const PoseSE3& ego_pose, const LidarSpec& spec,
                           double t, int jobs = 1);

/// Same, against a snapshot already resolved at `snapshot.time()`.
SemanticScan simulate_scan(const SceneSnapshot& snapshot, const PoseSE3& ego_pose,
                           const LidarSpec& spec, int jobs = 1);

}  // namespace parkocc::sim
