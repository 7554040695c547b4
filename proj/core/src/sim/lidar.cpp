#include "parkocc/sim/lidar.hpp"

#include <cmath>

#include "parkocc/error.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::sim {

void LidarSpec::validate() const {
  if (channels < 1) throw ConfigError("lidar channels must be >= 1");
  if (!(range > 0)) throw ConfigError("lidar range must be positive");
  if (azimuth_steps < 4) throw ConfigError("lidar azimuth_steps must be >= 4");
  if (!(horizontal_fov > 0 && horizontal_fov <= 360.0)) {
    throw ConfigError("lidar horizontal_fov must lie in (0, 360]");
  }
  if (!(vfov_lower <= vfov_upper) || vfov_lower < -90.0 || vfov_upper > 90.0) {
    throw ConfigError("lidar vertical fov must satisfy -90 <= lower <= upper <= 90");
  }
}

double LidarSpec::elevation_deg(int channel) const {
  if (channels == 1) return vfov_lower;
  return vfov_lower + (vfov_upper - vfov_lower) * channel / (channels - 1);
}

double LidarSpec::azimuth_deg(int step) const {
  return horizontal_fov * step / azimuth_steps;
}

Vec3 LidarSpec::direction(int channel, int step) const {
  const double e = geom::deg2rad(elevation_deg(channel));
  const double a = geom::deg2rad(azimuth_deg(step));
  return Vec3(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
}

SemanticScan simulate_scan(const SceneSnapshot& snapshot, const PoseSE3& ego_pose,
                           const LidarSpec& spec, int jobs) {
  spec.validate();
  SemanticScan scan;
  scan.sensor_in_ego = spec.mount;
  scan.sensor_in_world = geom::chain_to_world(spec.mount, ego_pose);
  scan.time = snapshot.time();

  const PoseSE3& sw = scan.sensor_in_world;
  const Vec3 origin = sw.translation();
  std::vector<std::vector<ScanPoint>> per_channel(static_cast<std::size_t>(spec.channels));
  util::parallel_for(per_channel.size(), jobs, [&](std::size_t c) {
    auto& out = per_channel[c];
    out.reserve(static_cast<std::size_t>(spec.azimuth_steps));
    for (int k = 0; k < spec.azimuth_steps; ++k) {
      const Vec3 d_sensor = spec.direction(static_cast<int>(c), k);
      const Vec3 d_world = sw.rotate(d_sensor).normalized();
      auto hit = snapshot.cast(origin, d_world, spec.range);
      if (!hit) continue;
      hit->point = sw.apply_inverse(hit->point);
      out.push_back({*hit, static_cast<int>(c), k});
    }
  });
  std::size_t total = 0;
  for (const auto& v : per_channel) total += v.size();
  scan.points.reserve(total);
  for (auto& v : per_channel) scan.points.insert(scan.points.end(), v.begin(), v.end());
  return scan;
}

SemanticScan simulate_scan(const SceneModel& scene, const PoseSE3& ego_pose, const LidarSpec& spec,
                           double t, int jobs) {
  return simulate_scan(SceneSnapshot(scene, t), ego_pose, spec, jobs);
}

}  // namespace parkocc::sim
