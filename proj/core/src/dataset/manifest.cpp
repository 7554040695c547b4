#include "parkocc/dataset/manifest.hpp"

#include <fstream>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const Json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Json to_json(const sim::SceneConfig& c) {
  return Json{{"seed", c.seed},
              {"lot_width", c.lot_width},
              {"lot_length", c.lot_length},
              {"ceiling_height", c.ceiling_height},
              {"pillar_spacing", c.pillar_spacing},
              {"pillar_cross_section", c.pillar_cross_section},
              {"parked_car_density", c.parked_car_density},
              {"dynamic_car_count", c.dynamic_car_count},
              {"scene_duration", c.scene_duration},
              {"fixed_dt", c.fixed_dt},
              {"wall_thickness", c.wall_thickness},
              {"vehicle_speed", c.vehicle_speed}};
}

sim::SceneConfig scene_config_from_json(const Json& j) {
  sim::SceneConfig c;
  read_opt(j, "seed", c.seed);
  read_opt(j, "lot_width", c.lot_width);
  read_opt(j, "lot_length", c.lot_length);
  read_opt(j, "ceiling_height", c.ceiling_height);
  read_opt(j, "pillar_spacing", c.pillar_spacing);
  read_opt(j, "pillar_cross_section", c.pillar_cross_section);
  read_opt(j, "parked_car_density", c.parked_car_density);
  read_opt(j, "dynamic_car_count", c.dynamic_car_count);
  read_opt(j, "scene_duration", c.scene_duration);
  read_opt(j, "fixed_dt", c.fixed_dt);
  read_opt(j, "wall_thickness", c.wall_thickness);
  read_opt(j, "vehicle_speed", c.vehicle_speed);
  return c;
}

Json to_json(const sim::LidarSpec& s) {
  const auto rpy = geom::rpy_from_rotation(s.mount.rotation());
  return Json{{"channels", s.channels},
              {"range", s.range},
              {"horizontal_fov", s.horizontal_fov},
              {"vertical_fov", Json::array({s.vfov_lower, s.vfov_upper})},
              {"azimuth_steps", s.azimuth_steps},
              {"mount_translation", vec_json(s.mount.translation())},
              {"mount_rpy", Json::array({rpy.roll, rpy.pitch, rpy.yaw})}};
}

sim::LidarSpec lidar_spec_from_json(const Json& j) {
  sim::LidarSpec s;
  read_opt(j, "channels", s.channels);
  read_opt(j, "range", s.range);
  read_opt(j, "horizontal_fov", s.horizontal_fov);
  read_opt(j, "azimuth_steps", s.azimuth_steps);
  if (j.contains("vertical_fov")) {
    s.vfov_lower = j["vertical_fov"].at(0).get<double>();
    s.vfov_upper = j["vertical_fov"].at(1).get<double>();
  }
  Vec3 t = s.mount.translation();
  geom::RotationRPY rpy;
  if (j.contains("mount_translation")) t = vec_from(j["mount_translation"]);
  if (j.contains("mount_rpy")) {
    rpy = {j["mount_rpy"].at(0).get<double>(), j["mount_rpy"].at(1).get<double>(),
           j["mount_rpy"].at(2).get<double>()};
  }
  s.mount = PoseSE3::from_rpy(rpy, t);
  return s;
}

Json to_json(const CollectConfig& c) {
  Json cams = Json::array();
  for (const auto& cam : c.sensors.cameras) {
    cams.push_back({{"name", cam.name},
                    {"position", vec_json(cam.position)},
                    {"yaw", cam.yaw},
                    {"width", cam.width},
                    {"height", cam.height},
                    {"fov", cam.fov}});
  }
  Json radars = Json::array();
  for (const auto& r : c.sensors.radars) {
    radars.push_back({{"name", r.name},
                      {"position", vec_json(r.position)},
                      {"yaw", r.yaw},
                      {"horizontal_fov", r.horizontal_fov},
                      {"vertical_fov", r.vertical_fov}});
  }
  return Json{{"keyframe_interval", c.keyframe_interval},
              {"fixed_dt", c.fixed_dt},
              {"scene_count", c.scene_count},
              {"frames_per_scene", c.frames_per_scene},
              {"annotate_static", c.annotate_static},
              {"location", c.location},
              {"vehicle", c.vehicle},
              {"date_captured", c.date_captured},
              {"sensors",
               {{"cameras", cams},
                {"radars", radars},
                {"lidar_name", c.sensors.lidar_name},
                {"lidar", to_json(c.sensors.lidar)},
                {"lidar_table_yaw", c.sensors.lidar_table_yaw}}}};
}

CollectConfig collect_config_from_json(const Json& j) {
  CollectConfig c;
  read_opt(j, "keyframe_interval", c.keyframe_interval);
  read_opt(j, "fixed_dt", c.fixed_dt);
  read_opt(j, "scene_count", c.scene_count);
  read_opt(j, "frames_per_scene", c.frames_per_scene);
  read_opt(j, "annotate_static", c.annotate_static);
  read_opt(j, "location", c.location);
  read_opt(j, "vehicle", c.vehicle);
  read_opt(j, "date_captured", c.date_captured);
  if (j.contains("sensors")) {
    const auto& s = j["sensors"];
    if (s.contains("cameras")) {
      c.sensors.cameras.clear();
      for (const auto& cam : s["cameras"]) {
        CameraSpec cs;
        cs.name = cam.at("name").get<std::string>();
        cs.position = vec_from(cam.at("position"));
        read_opt(cam, "yaw", cs.yaw);
        read_opt(cam, "width", cs.width);
        read_opt(cam, "height", cs.height);
        read_opt(cam, "fov", cs.fov);
        c.sensors.cameras.push_back(cs);
      }
    }
    if (s.contains("radars")) {
      c.sensors.radars.clear();
      for (const auto& r : s["radars"]) {
        RadarSpec rs;
        rs.name = r.at("name").get<std::string>();
        rs.position = vec_from(r.at("position"));
        read_opt(r, "yaw", rs.yaw);
        read_opt(r, "horizontal_fov", rs.horizontal_fov);
        read_opt(r, "vertical_fov", rs.vertical_fov);
        c.sensors.radars.push_back(rs);
      }
    }
    read_opt(s, "lidar_name", c.sensors.lidar_name);
    if (s.contains("lidar")) c.sensors.lidar = lidar_spec_from_json(s["lidar"]);
    read_opt(s, "lidar_table_yaw", c.sensors.lidar_table_yaw);
  }
  return c;
}

Json Manifest::to_json() const {
  Json scenes_j = Json::array();
  for (const auto& s : scenes) {
    scenes_j.push_back({{"name", s.name},
                        {"token", s.token},
                        {"scene_config", s.config ? dataset::to_json(*s.config) : Json(nullptr)}});
  }
  Json dup = Json::array();
  for (const auto& d : collect.sensors.duplicate_positions()) dup.push_back(d);
  return Json{
      {"format", "nuscenes-lidarseg"},
      {"layout_version", kLayoutVersion},
      {"version", std::string(kVersionDir)},
      {"convention",
       {{"axes", "x forward, y right, z up (left-handed)"},
        {"rotation", "R = Rx(roll) * Ry(pitch) * Rz(yaw), degrees, yaw turns +x toward +y"},
        {"quaternion", "w, x, y, z"},
        {"timestamp", "frame_index * fixed_dt, microseconds"}}},
      {"point_record",
       {{"layout", "x, y, z, intensity, ring as little-endian float32"},
        {"intensity", "255 * incidence cosine"},
        {"ring", "channel index"},
        {"object_index", "not stored"}}},
      {"sensor_table_notes",
       {{"duplicate_positions", dup},
        {"lidar_table_yaw", collect.sensors.lidar_table_yaw},
        {"lidar_mount_yaw_applied", geom::rpy_from_rotation(collect.sensors.lidar.mount.rotation()).yaw}}},
      {"collect", dataset::to_json(collect)},
      {"scenes", scenes_j}};
}

Manifest Manifest::from_json(const Json& j) {
  Manifest m;
  try {
    if (j.value("layout_version", 0) != kLayoutVersion) {
      throw IoError("unsupported manifest layout_version");
    }
    m.collect = collect_config_from_json(j.at("collect"));
    for (const auto& s : j.at("scenes")) {
      ManifestScene ms{s.at("name").get<std::string>(), s.at("token").get<std::string>(), {}};
      if (s.contains("scene_config") && !s["scene_config"].is_null()) {
        ms.config = scene_config_from_json(s["scene_config"]);
      }
      m.scenes.push_back(std::move(ms));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.json");
  if (!in) throw IoError("missing manifest.json under " + root.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("unparsable manifest.json: ") + e.what());
  }
  return from_json(j);
}

void Manifest::save(const std::filesystem::path& root) const {
  std::ofstream out(root / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write manifest.json");
  out << to_json().dump(2) << '\n';
}

}  // namespace parkocc::dataset
