#pragma once

#include <string>
#include <vector>

#include "parkocc/sim/lidar.hpp"

namespace parkocc::dataset {

using geom::PoseSE3;
using geom::Vec3;

struct CameraSpec {
  std::string name;
  Vec3 position = Vec3::Zero();  // ego frame, meters
  double yaw = 0.0;              // degrees
  int width = 1600;
  int height = 900;
  double fov = 70.0;  // horizontal, degrees

  /// Pinhole focal length in pixels: width / (2 tan(fov / 2)).
  double focal_length() const;
};

struct RadarSpec {
  std::string name;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double horizontal_fov = 80.0;
  double vertical_fov = 30.0;
};

struct SensorSuite {
  std::vector<CameraSpec> cameras;
  std::vector<RadarSpec> radars;
  std::string lidar_name = "LIDAR_TOP";
  sim::LidarSpec lidar;
  double lidar_table_yaw = 90.0;  // listed mount yaw, recorded but not applied

  /// Acquisition tables: six cameras, five radars, one semantic LiDAR.
  static SensorSuite defaults();

  /// Table rows that share a mount position, e.g. "CAM_BACK_LEFT/CAM_BACK_RIGHT".
  std::vector<std::string> duplicate_positions() const;
};

/// Frame and keyframe cadence of a collection run.
struct CollectConfig {
  double keyframe_interval = 1.0;  // seconds
  double fixed_dt = 0.1;           // seconds
  int scene_count = 3;
  int frames_per_scene = 200;
  SensorSuite sensors = SensorSuite::defaults();
  bool annotate_static = false;  // also annotate pillars
  std::string location = "underground-parking";
  std::string vehicle = "parkocc-ego";
  std::string date_captured = "2024-01-01";
  int jobs = 1;

  /// keyframe_interval / fixed_dt; throws ConfigError unless a positive integer.
  int keyframe_ratio() const;
  void validate() const;
};

/// (frame_index + 1) mod (keyframe_interval / fixed_dt) == 0.
bool is_keyframe(int frame_index, const CollectConfig& cfg);

/// Microseconds for frame i: i * fixed_dt.
long long frame_timestamp_us(int frame_index, double fixed_dt);

}  // namespace parkocc::dataset
