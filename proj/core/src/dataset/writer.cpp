#include "parkocc/dataset/writer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "parkocc/annotate/annotate.hpp"
#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/dataset/token.hpp"
#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace fs = std::filesystem;

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json quat_json(const geom::QuatWXYZ& q) { return Json::array({q[0], q[1], q[2], q[3]}); }

std::string frame_key(const std::string& scene, int frame) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "/frame-%06d", frame);
  return scene + buf;
}

// Two tags share a category name, so the tag is part of the key.
std::string category_token(const MappedTag& m) {
  return generate_token("category", std::to_string(m.nuscenes_tag) + "/" + std::string(m.category_name));
}

std::string padded_ts(long long us) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016lld", us);
  return buf;
}

}  // namespace

std::string scene_name(int scene_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene-%04d", scene_index);
  return buf;
}

std::vector<PointRecord> to_records(const sim::SemanticScan& scan) {
  std::vector<PointRecord> out;
  out.reserve(scan.points.size());
  for (const auto& p : scan.points) {
    out.push_back({static_cast<float>(p.hit.point.x()), static_cast<float>(p.hit.point.y()),
                   static_cast<float>(p.hit.point.z()),
                   static_cast<float>(255.0 * p.hit.incidence_cosine),
                   static_cast<float>(p.channel)});
  }
  return out;
}

std::vector<std::uint8_t> to_labels(const sim::SemanticScan& scan) {
  std::vector<std::uint8_t> out;
  out.reserve(scan.points.size());
  for (const auto& p : scan.points) out.push_back(map_semantic_tag(p.hit.semantic_tag).nuscenes_tag);
  return out;
}

DatasetWriter::DatasetWriter(fs::path root, CollectConfig cfg, bool overwrite)
    : root_(std::move(root)), cfg_(std::move(cfg)) {
  cfg_.validate();
  std::error_code ec;
  if (fs::exists(root_, ec) && !fs::is_empty(root_, ec)) {
    if (!overwrite) {
      throw IoError("output directory " + root_.string() + " is not empty (use --overwrite)");
    }
    fs::remove_all(root_, ec);
    if (ec) throw IoError("cannot clear " + root_.string() + ": " + ec.message());
  }
  const std::string lidar = cfg_.sensors.lidar_name;
  for (const fs::path& d : {root_ / "maps", root_ / "samples" / lidar, root_ / "sweeps" / lidar,
                            root_ / kVersionDir, root_ / "lidarseg" / kVersionDir}) {
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
  }
  manifest_.collect = cfg_;
  add_static_tables();
}

void DatasetWriter::add_static_tables() {
  auto sensor = [&](const std::string& channel, const char* modality) {
    db_.add("sensor", {{"token", generate_token("sensor", channel)},
                       {"channel", channel},
                       {"modality", modality}});
  };
  for (const auto& c : cfg_.sensors.cameras) sensor(c.name, "camera");
  for (const auto& r : cfg_.sensors.radars) sensor(r.name, "radar");
  sensor(cfg_.sensors.lidar_name, "lidar");

  std::set<std::uint8_t> seen;
  for (int tag = 0; tag <= source_tag::kMax; ++tag) {
    const auto m = map_semantic_tag(tag);
    if (!seen.insert(m.nuscenes_tag).second) continue;
    db_.add("category", {{"token", category_token(m)},
                         {"name", std::string(m.category_name)},
                         {"description", ""},
                         {"index", m.nuscenes_tag}});
  }
  for (const char* a : {"vehicle.moving", "vehicle.parked", "vehicle.stopped"}) {
    db_.add("attribute", {{"token", generate_token("attribute", a)}, {"name", a}, {"description", ""}});
  }
  const char* levels[] = {"v0-40", "v40-60", "v60-80", "v80-100"};
  const char* descriptions[] = {
      "visibility of whole object is between 0 and 40%",
      "visibility of whole object is between 40 and 60%",
      "visibility of whole object is between 60 and 80%",
      "visibility of whole object is between 80 and 100%"};
  for (int i = 0; i < 4; ++i) {
    db_.add("visibility", {{"token", std::to_string(i + 1)},
                           {"level", levels[i]},
                           {"description", descriptions[i]}});
  }
}

void DatasetWriter::write_map(const sim::SceneModel& scene, const std::string& name,
                              const std::string& log_token) {
  // Binary PGM floor plan at 0.1 m per pixel: 0 where a static box stands.
  Vec3 lo = scene.bounds_lo(), hi = scene.bounds_hi();
  if (lo.x() < -1e8 || hi.x() > 1e8) {
    lo = Vec3::Constant(1e300);
    hi = Vec3::Constant(-1e300);
    for (const auto& o : scene.objects()) {
      if (o.is_plane()) continue;
      lo = lo.cwiseMin(o.pose.translation() - o.half_extents.norm() * Vec3::Ones());
      hi = hi.cwiseMax(o.pose.translation() + o.half_extents.norm() * Vec3::Ones());
    }
    if (lo.x() > hi.x()) lo = hi = Vec3::Zero();
  }
  constexpr double kRes = 0.1;
  const int w = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / kRes)));
  const int h = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / kRes)));
  std::vector<unsigned char> px(static_cast<std::size_t>(w) * h, 255);
  for (const auto& o : scene.objects()) {
    if (o.is_plane() || o.is_dynamic()) continue;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const Vec3 p(lo.x() + (c + 0.5) * kRes, hi.y() - (r + 0.5) * kRes, o.pose.translation().z());
        if (sim::box_contains(o, o.pose, p)) px[static_cast<std::size_t>(r) * w + c] = 0;
      }
    }
  }
  const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<char> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), px.begin(), px.end());
  const std::string filename = "maps/" + name + ".pgm";
  write_file_bytes(root_ / filename, bytes);
  db_.add("map", {{"token", generate_token("map", name)},
                  {"log_tokens", Json::array({log_token})},
                  {"category", "semantic_prior"},
                  {"filename", filename}});
}

std::string DatasetWriter::add_scene(const sim::SceneModel& scene, const std::string& name,
                                     const CollectProgress& progress) {
  const int frames = cfg_.frames_per_scene;
  const int ratio = cfg_.keyframe_ratio();
  const double dt = cfg_.fixed_dt;
  const auto& ego = scene.ego_trajectory();
  if (ego.empty()) throw Error("dataset", "scene " + name + " has no ego trajectory");
  if ((frames - 1) * dt > ego.end_time() + 1e-9 || ego.start_time() > 1e-9) {
    throw ConfigError("scene_duration of " + name + " does not cover frames_per_scene * fixed_dt");
  }
  const std::string& lidar_name = cfg_.sensors.lidar_name;

  const std::string scene_token = generate_token("scene", name);
  const std::string log_token = generate_token("log", name);
  db_.add("log", {{"token", log_token},
                  {"logfile", name},
                  {"vehicle", cfg_.vehicle},
                  {"date_captured", cfg_.date_captured},
                  {"location", cfg_.location}});
  write_map(scene, name, log_token);

  // Calibration: one row per sensor and scene.
  auto calib_token = [&](const std::string& sensor) {
    return generate_token("calibrated_sensor", name + "/" + sensor);
  };
  for (const auto& c : cfg_.sensors.cameras) {
    const double f = c.focal_length();
    db_.add("calibrated_sensor",
            {{"token", calib_token(c.name)},
             {"sensor_token", generate_token("sensor", c.name)},
             {"translation", vec_json(c.position)},
             {"rotation", quat_json(geom::quaternion_from_rotation(
                              geom::rotation_from_rpy({0.0, 0.0, c.yaw})))},
             {"camera_intrinsic", Json::array({Json::array({f, 0.0, c.width / 2.0}),
                                               Json::array({0.0, f, c.height / 2.0}),
                                               Json::array({0.0, 0.0, 1.0})})}});
  }
  for (const auto& r : cfg_.sensors.radars) {
    db_.add("calibrated_sensor",
            {{"token", calib_token(r.name)},
             {"sensor_token", generate_token("sensor", r.name)},
             {"translation", vec_json(r.position)},
             {"rotation", quat_json(geom::quaternion_from_rotation(
                              geom::rotation_from_rpy({0.0, 0.0, r.yaw})))},
             {"camera_intrinsic", Json::array()}});
  }
  const auto& mount = cfg_.sensors.lidar.mount;
  db_.add("calibrated_sensor",
          {{"token", calib_token(lidar_name)},
           {"sensor_token", generate_token("sensor", lidar_name)},
           {"translation", vec_json(mount.translation())},
           {"rotation", quat_json(geom::quaternion_from_rotation(mount.rotation()))},
           {"camera_intrinsic", Json::array()}});

  // Tokens up front so rows can carry prev/next links.
  std::vector<int> keyframes;
  for (int i = 0; i < frames; ++i) {
    if ((i + 1) % ratio == 0) keyframes.push_back(i);
  }
  auto sample_token = [&](int frame) { return generate_token("sample", frame_key(name, frame)); };
  auto sd_token = [&](int frame) {
    return generate_token("sample_data", frame_key(name, frame) + "/" + lidar_name);
  };
  auto ann_token = [&](int frame, int obj) {
    return generate_token("sample_annotation", frame_key(name, frame) + "/object-" + std::to_string(obj));
  };
  std::map<int, std::size_t> key_pos;
  for (std::size_t k = 0; k < keyframes.size(); ++k) key_pos[keyframes[k]] = k;

  const auto targets = annotate::annotated_objects(scene, cfg_.annotate_static);
  struct InstanceInfo {
    int count = 0;
    std::string first, last;
  };
  std::map<int, InstanceInfo> instances;

  std::size_t next_key = 0;
  for (int i = 0; i < frames; ++i) {
    if (progress) progress(name, i, frames);
    const double t = i * dt;
    const long long ts = frame_timestamp_us(i, dt);
    const PoseSE3 ego_pose = ego.pose_at(t);
    const sim::SceneSnapshot snapshot(scene, t);
    const sim::SemanticScan scan = sim::simulate_scan(snapshot, ego_pose, cfg_.sensors.lidar, cfg_.jobs);
    const bool key = (i + 1) % ratio == 0;
    while (next_key < keyframes.size() && keyframes[next_key] < i) ++next_key;
    const int owner = next_key < keyframes.size() ? keyframes[next_key] : keyframes.back();

    const std::string ego_token = generate_token("ego_pose", frame_key(name, i));
    db_.add("ego_pose", {{"token", ego_token},
                         {"timestamp", ts},
                         {"rotation", quat_json(geom::quaternion_from_rotation(ego_pose.rotation()))},
                         {"translation", vec_json(ego_pose.translation())}});

    const std::string filename = std::string(key ? "samples/" : "sweeps/") + lidar_name + "/" + name +
                                 "__" + lidar_name + "__" + padded_ts(ts) + ".pcd.bin";
    const auto records = to_records(scan);
    write_point_bin(records, root_ / filename);
    const std::string sd = sd_token(i);
    db_.add("sample_data", {{"token", sd},
                            {"sample_token", sample_token(owner)},
                            {"ego_pose_token", ego_token},
                            {"calibrated_sensor_token", calib_token(lidar_name)},
                            {"timestamp", ts},
                            {"fileformat", "pcd"},
                            {"is_key_frame", key},
                            {"height", 0},
                            {"width", 0},
                            {"filename", filename},
                            {"prev", i > 0 ? sd_token(i - 1) : ""},
                            {"next", i + 1 < frames ? sd_token(i + 1) : ""},
                            {"num_points", records.size()}});
    if (!key) continue;

    const std::size_t kp = key_pos.at(i);
    const std::string st = sample_token(i);
    db_.add("sample", {{"token", st},
                       {"timestamp", ts},
                       {"prev", kp > 0 ? sample_token(keyframes[kp - 1]) : ""},
                       {"next", kp + 1 < keyframes.size() ? sample_token(keyframes[kp + 1]) : ""},
                       {"scene_token", scene_token}});

    const auto labels = to_labels(scan);
    const std::string seg_file =
        "lidarseg/" + std::string(kVersionDir) + "/" + sd + "_lidarseg.bin";
    write_lidarseg(labels, root_ / seg_file);
    db_.add("lidarseg", {{"token", generate_token("lidarseg", sd)},
                         {"sample_data_token", sd},
                         {"filename", seg_file}});

    annotate::AnnotateOptions opts;
    opts.include_static = cfg_.annotate_static;
    opts.sensor_in_ego = mount;
    const auto anns = annotate::annotate_keyframe(scene, ego_pose, st, t, name, opts);
    for (const auto& a : anns) {
      std::size_t n_pts = 0;
      for (const auto& p : scan.points) n_pts += p.hit.object_index == a.object_index;
      const auto& o = scene.object(a.object_index);
      Json attrs = Json::array();
      if (o.kind == sim::ObjectKind::DynamicCar) attrs.push_back(generate_token("attribute", "vehicle.moving"));
      if (o.kind == sim::ObjectKind::ParkedCar) attrs.push_back(generate_token("attribute", "vehicle.parked"));
      db_.add("sample_annotation",
              {{"token", ann_token(i, a.object_index)},
               {"sample_token", st},
               {"instance_token", a.instance_token},
               {"visibility_token", a.visibility_token},
               {"attribute_tokens", attrs},
               {"translation", vec_json(a.box.center)},
               {"size", vec_json(a.box.size)},
               {"rotation", quat_json(a.rotation)},
               {"prev", kp > 0 ? ann_token(keyframes[kp - 1], a.object_index) : ""},
               {"next", kp + 1 < keyframes.size() ? ann_token(keyframes[kp + 1], a.object_index) : ""},
               {"num_lidar_pts", n_pts},
               {"num_radar_pts", 0}});
      auto& inst = instances[a.object_index];
      if (inst.count == 0) inst.first = ann_token(i, a.object_index);
      inst.last = ann_token(i, a.object_index);
      ++inst.count;
    }
  }

  for (int idx : targets) {
    const auto& inst = instances[idx];
    const auto m = map_semantic_tag(scene.object(idx).source_tag);
    db_.add("instance", {{"token", annotate::instance_token(name, idx)},
                         {"category_token", category_token(m)},
                         {"nbr_annotations", inst.count},
                         {"first_annotation_token", inst.first},
                         {"last_annotation_token", inst.last}});
  }

  db_.add("scene", {{"token", scene_token},
                    {"log_token", log_token},
                    {"nbr_samples", keyframes.size()},
                    {"first_sample_token", sample_token(keyframes.front())},
                    {"last_sample_token", sample_token(keyframes.back())},
                    {"name", name},
                    {"description", "procedural underground parking lot"}});
  manifest_.scenes.push_back({name, scene_token, scene.config});
  return scene_token;
}

void DatasetWriter::finish() {
  db_.save(root_);
  manifest_.save(root_);
}

RelationalDB collect_run(const sim::SceneModel& scene, const CollectConfig& cfg,
                         const fs::path& out_dir, bool overwrite) {
  DatasetWriter w(out_dir, cfg, overwrite);
  w.add_scene(scene, scene_name(0));
  w.finish();
  return w.db();
}

}  // namespace parkocc::dataset
