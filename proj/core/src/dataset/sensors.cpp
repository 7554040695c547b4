#include "parkocc/dataset/sensors.hpp"

#include <cmath>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

double CameraSpec::focal_length() const {
  return width / (2.0 * std::tan(geom::deg2rad(fov) / 2.0));
}

SensorSuite SensorSuite::defaults() {
  SensorSuite s;
  s.cameras = {
      {"CAM_FRONT", Vec3(1.5, 0.0, 2.0), 0.0, 1600, 900, 70.0},
      {"CAM_FRONT_RIGHT", Vec3(1.5, 0.7, 2.0), 55.0, 1600, 900, 70.0},
      {"CAM_FRONT_LEFT", Vec3(1.5, -0.7, 2.0), -55.0, 1600, 900, 70.0},
      {"CAM_BACK_LEFT", Vec3(-0.7, 0.0, 2.0), -110.0, 1600, 900, 70.0},
      {"CAM_BACK", Vec3(-1.5, 0.0, 2.0), 180.0, 1600, 900, 110.0},
      {"CAM_BACK_RIGHT", Vec3(-0.7, 0.0, 2.0), 110.0, 1600, 900, 70.0},
  };
  s.radars = {
      {"RADAR_FRONT", Vec3(1.5, 0.0, 0.5), 0.0, 80.0, 30.0},
      {"RADAR_FRONT_RIGHT", Vec3(1.5, 0.7, 0.5), 90.0, 80.0, 30.0},
      {"RADAR_FRONT_LEFT", Vec3(1.5, -0.7, 0.5), -90.0, 80.0, 30.0},
      {"RADAR_BACK_LEFT", Vec3(-1.5, -0.7, 0.5), 180.0, 80.0, 30.0},
      {"RADAR_BACK_RIGHT", Vec3(-1.5, 0.7, 0.5), 180.0, 80.0, 30.0},
  };
  return s;
}

std::vector<std::string> SensorSuite::duplicate_positions() const {
  struct Entry {
    std::string name;
    Vec3 pos;
  };
  std::vector<Entry> all;
  for (const auto& c : cameras) all.push_back({c.name, c.position});
  for (const auto& r : radars) all.push_back({r.name, r.position});
  all.push_back({lidar_name, lidar.mount.translation()});
  std::vector<std::string> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (all[i].pos == all[j].pos) out.push_back(all[i].name + "/" + all[j].name);
    }
  }
  return out;
}

int CollectConfig::keyframe_ratio() const {
  if (!(fixed_dt > 0)) throw ConfigError("fixed_dt must be positive");
  if (!(keyframe_interval > 0)) throw ConfigError("keyframe_interval must be positive");
  const double r = keyframe_interval / fixed_dt;
  const double n = std::round(r);
  if (n < 1 || std::abs(r - n) > 1e-6 * n) {
    throw ConfigError("keyframe_interval must be an integer multiple of fixed_dt");
  }
  return static_cast<int>(n);
}

void CollectConfig::validate() const {
  const int ratio = keyframe_ratio();
  if (scene_count < 1) throw ConfigError("scene_count must be >= 1");
  if (frames_per_scene < ratio) {
    throw ConfigError("zero keyframes: frames_per_scene (" + std::to_string(frames_per_scene) +
                      ") is below one keyframe interval (" + std::to_string(ratio) + " frames)");
  }
  sensors.lidar.validate();
}

bool is_keyframe(int frame_index, const CollectConfig& cfg) {
  return (frame_index + 1) % cfg.keyframe_ratio() == 0;
}

long long frame_timestamp_us(int frame_index, double fixed_dt) {
  return std::llround(static_cast<double>(frame_index) * fixed_dt * 1e6);
}

}  // namespace parkocc::dataset
