#include "parkocc/app/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

#include "parkocc/dataset/manifest.hpp"
#include "parkocc/dataset/writer.hpp"
#include "parkocc/densify/mesh.hpp"
#include "parkocc/error.hpp"
#include "parkocc/occ/io.hpp"
#include "parkocc/occ/raytrace.hpp"
#include "parkocc/occ/voxelize.hpp"
#include "parkocc/sim/analytic.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::app {

namespace fs = std::filesystem;
using dataset::Json;

namespace {

void require_empty_or_overwrite(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec)) {
    if (!overwrite) throw IoError("output directory " + dir.string() + " is not empty (use --overwrite)");
    fs::remove_all(dir, ec);
    if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

geom::PoseSE3 pose_from_row(const Json& row) {
  const auto& q = row.at("rotation");
  const auto& t = row.at("translation");
  return {geom::rotation_from_quaternion({q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                          q[3].get<double>()}),
          Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>())};
}

const Json& row_or_throw(const dataset::RelationalDB& db, std::string_view table, const std::string& token) {
  const Json* r = db.find(table, token);
  if (!r) throw Error("dataset", "missing " + std::string(table) + " row " + token);
  return *r;
}

void merge_into(stitch::AggregatedScene& dst, stitch::AggregatedScene&& src) {
  stitch::append(dst.static_world, src.static_world);
  for (auto& [idx, cloud] : src.objects) {
    auto& d = dst.objects[idx];
    d.frame = cloud.frame;
    stitch::append(d, cloud);
  }
  for (const auto& [idx, h] : src.half_extents) dst.half_extents[idx] = h;
}

}  // namespace

dataset::ValidationReport run_synth(const RunConfig& cfg, const fs::path& dataset_dir, bool overwrite,
                                    std::ostream* log) {
  cfg.validate();
  dataset::CollectConfig collect = cfg.collect;
  collect.jobs = cfg.jobs <= 0 ? util::default_jobs() : cfg.jobs;
  dataset::DatasetWriter writer(dataset_dir, collect, overwrite);
  for (int i = 0; i < cfg.collect.scene_count; ++i) {
    const sim::SceneModel scene = sim::build_parking_lot(cfg.scene_config(i));
    const std::string name = dataset::scene_name(i);
    writer.add_scene(scene, name, [&](const std::string& s, int frame, int frames) {
      if (log) *log << s << ": frame " << frame + 1 << "/" << frames << "\n" << std::flush;
    });
  }
  writer.finish();
  return dataset::validate_dataset(dataset_dir);
}

SceneSequence load_sequence(const fs::path& root, const dataset::RelationalDB& db, const std::string& scene_name,
                            const RunConfig& cfg) {
  const auto manifest = dataset::Manifest::load(root);
  const auto ms = std::find_if(manifest.scenes.begin(), manifest.scenes.end(),
                               [&](const auto& s) { return s.name == scene_name; });
  if (ms == manifest.scenes.end()) throw Error("dataset", "scene " + scene_name + " not in manifest");
  if (!ms->config) throw Error("dataset", "scene " + scene_name + " has no stored config to rebuild box poses");

  SceneSequence seq;
  seq.name = scene_name;
  seq.scene = sim::build_parking_lot(*ms->config);

  std::map<std::string, bool> samples;
  for (const auto& s : db.table("sample")) {
    if (s.at("scene_token") == ms->token) samples[s.at("token").get<std::string>()] = true;
  }
  std::map<std::string, std::string> seg_of;
  for (const auto& l : db.table("lidarseg")) {
    seg_of[l.at("sample_data_token").get<std::string>()] = l.at("filename").get<std::string>();
  }
  const std::string lidar_calib_prefix = manifest.collect.sensors.lidar_name;
  std::vector<const Json*> rows;
  for (const auto& sd : db.table("sample_data")) {
    if (!samples.count(sd.at("sample_token").get<std::string>())) continue;
    const auto& cs = row_or_throw(db, "calibrated_sensor", sd.at("calibrated_sensor_token").get<std::string>());
    const auto& sensor = row_or_throw(db, "sensor", cs.at("sensor_token").get<std::string>());
    if (sensor.at("modality") != "lidar") continue;
    rows.push_back(&sd);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Json* a, const Json* b) {
    return a->at("timestamp").get<long long>() < b->at("timestamp").get<long long>();
  });

  std::vector<int> vehicles;
  for (const auto& o : seq.scene.objects()) {
    if (o.is_vehicle()) vehicles.push_back(o.index);
  }
  for (std::size_t f = 0; f < rows.size(); ++f) {
    const Json& sd = *rows[f];
    const double t = static_cast<double>(sd.at("timestamp").get<long long>()) * 1e-6;
    seq.times.push_back(t);
    stitch::FrameInput in;
    in.ego_pose = pose_from_row(row_or_throw(db, "ego_pose", sd.at("ego_pose_token").get<std::string>()));
    in.sensor_pose =
        pose_from_row(row_or_throw(db, "calibrated_sensor", sd.at("calibrated_sensor_token").get<std::string>()));
    const auto records = dataset::read_point_bin(root / sd.at("filename").get<std::string>());
    const bool key = sd.at("is_key_frame").get<bool>();
    std::vector<std::uint8_t> labels;
    if (key) {
      const auto it = seg_of.find(sd.at("token").get<std::string>());
      if (it == seg_of.end()) throw Error("dataset", "key frame without lidarseg file");
      labels = dataset::read_lidarseg(root / it->second);
      if (labels.size() != records.size()) throw Error("dataset", "label count mismatch");
    }
    in.scan.frame = geom::SensorFrame{lidar_calib_prefix};
    in.scan.viewpoints.push_back(Vec3::Zero());
    in.scan.points.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      in.scan.push_back(Vec3(records[i].x, records[i].y, records[i].z), key ? labels[i] : occ::kUnlabeled, 0);
    }
    for (int idx : vehicles) {
      const auto& o = seq.scene.object(idx);
      in.boxes.push_back({idx, o.half_extents, sim::object_pose_at(seq.scene, idx, t)});
    }
    if (key) {
      seq.key_frames.push_back(f);
      const std::string sample = sd.at("sample_token").get<std::string>();
      seq.key_samples.push_back(sample);
      seq.key_scans.push_back(in.scan);
      stitch::KeyPose kp;
      kp.ego_pose = in.ego_pose;
      kp.sensor_pose = in.sensor_pose;
      kp.sample_token = sample;
      for (const auto& b : in.boxes) kp.box_poses[b.object_index] = b.pose;
      seq.key_poses.push_back(std::move(kp));
    }
    merge_into(seq.aggregated, stitch::aggregate_sequence({in}, cfg.gt.split_margin));
  }
  if (rows.empty()) throw Error("dataset", "scene " + scene_name + " has no lidar frames");
  return seq;
}

std::size_t GtRunReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(keyframes.begin(), keyframes.end(), [](const auto& k) { return !k.ok; }));
}

void compare_with_oracle(const occ::VoxelGrid& gt, const occ::VoxelGrid& oracle,
                         const std::vector<std::uint8_t>& observed, KeyframeGtRecord& rec) {
  std::size_t tp = 0, fp = 0, fn = 0, same = 0, n_obs = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!observed[i]) continue;
    ++n_obs;
    const bool g = gt.occupied[i] != 0, o = oracle.occupied[i] != 0;
    if (g && o) {
      ++tp;
      same += gt.label[i] == oracle.label[i];
    } else if (g) {
      ++fp;
    } else if (o) {
      ++fn;
    }
  }
  rec.observed = n_obs;
  rec.oracle_iou = tp + fp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  rec.label_accuracy = tp == 0 ? 1.0 : static_cast<double>(same) / static_cast<double>(tp);
}

GtRunReport run_gt(const RunConfig& cfg, const GtOptions& opts, std::ostream* log) {
  cfg.validate();
  const int jobs = cfg.jobs <= 0 ? util::default_jobs() : cfg.jobs;
  const auto validation = dataset::validate_dataset(opts.dataset_dir);
  if (!validation.ok()) {
    const auto& f = validation.findings.front();
    throw Error("dataset", "dataset does not validate (" + std::to_string(validation.findings.size()) +
                               " findings, first: " + f.code + " at " + f.where + ")");
  }
  require_empty_or_overwrite(opts.out_dir, opts.overwrite);
  if (!opts.baseline_dir.empty()) require_empty_or_overwrite(opts.baseline_dir, opts.overwrite);
  const auto db = dataset::RelationalDB::load(opts.dataset_dir);
  const auto manifest = dataset::Manifest::load(opts.dataset_dir);
  const occ::GridSpec& spec = cfg.gt.grid;

  GtRunReport report;
  for (const auto& ms : manifest.scenes) {
    // Sample tokens of the scene, for failure records.
    std::vector<std::string> samples;
    for (const auto& s : db.table("sample")) {
      if (s.at("scene_token") == ms.token) samples.push_back(s.at("token").get<std::string>());
    }
    auto fail_all = [&](const std::string& why) {
      for (const auto& s : samples) {
        KeyframeGtRecord r;
        r.scene = ms.name;
        r.sample = s;
        r.error = why;
        if (log) *log << ms.name << " " << s << " FAILED " << why << "\n";
        report.keyframes.push_back(std::move(r));
      }
    };
    SceneSequence seq;
    occ::DenseScene dense;
    try {
      seq = load_sequence(opts.dataset_dir, db, ms.name, cfg);
      if (log) {
        *log << ms.name << ": " << seq.times.size() << " frames, " << seq.aggregated.static_world.size()
             << " static points, " << seq.aggregated.objects.size() << " objects\n"
             << std::flush;
      }
      dense = occ::densify_scene(seq.aggregated, cfg.gt, jobs);
      if (log) *log << ms.name << ": " << dense.static_world.size() << " dense static samples\n" << std::flush;
    } catch (const Error& e) {
      fail_all(e.what());
      continue;
    }
    for (std::size_t k = 0; k < seq.key_frames.size(); ++k) {
      KeyframeGtRecord rec;
      rec.scene = ms.name;
      rec.sample = seq.key_samples[k];
      try {
        const auto kg = occ::keyframe_gt(seq.aggregated, dense, seq.key_poses[k], spec, jobs);
        rec.gt_occupied = kg.gt.occupied_count();
        rec.sparse_occupied = kg.semantic.occupied_count();
        occ::write_grid(kg.gt, opts.out_dir / eval::grid_relpath(ms.name, rec.sample));
        if (!opts.baseline_dir.empty()) {
          const auto base = occ::baseline_predict(seq.key_scans[k], spec);
          rec.baseline_occupied = base.occupied_count();
          occ::write_grid(base, opts.baseline_dir / eval::grid_relpath(ms.name, rec.sample));
        }
        if (opts.oracle) {
          const auto& kp = seq.key_poses[k];
          const geom::PoseSE3 sensor_world = geom::chain_to_world(kp.sensor_pose, kp.ego_pose);
          const auto oracle =
              sim::analytic_occupancy(seq.scene, spec, seq.times[seq.key_frames[k]], sensor_world);
          const auto observed = occ::observed_voxels(spec, Vec3::Zero(), seq.key_scans[k].points);
          compare_with_oracle(kg.gt, oracle, observed, rec);
        }
        rec.ok = true;
      } catch (const Error& e) {
        rec.error = e.what();
      }
      if (log) {
        if (rec.ok) {
          char buf[256];
          std::snprintf(buf, sizeof buf, " gt=%zu sparse=%zu oracle_iou=%.4f label_acc=%.4f", rec.gt_occupied,
                        rec.sparse_occupied, rec.oracle_iou, rec.label_accuracy);
          *log << ms.name << " " << rec.sample << buf << "\n" << std::flush;
        } else {
          *log << ms.name << " " << rec.sample << " FAILED " << rec.error << "\n" << std::flush;
        }
      }
      report.keyframes.push_back(std::move(rec));
    }
  }
  return report;
}

eval::EvalReport run_eval(const RunConfig& cfg, const EvalOptions& opts) {
  const int jobs = cfg.jobs <= 0 ? util::default_jobs() : cfg.jobs;
  auto rep = eval::evaluate_run(opts.gt_dir, opts.pred_dir, cfg.miou_mode, jobs);
  eval::write_report(rep, opts.out_dir);
  if (rep.keyframes.empty()) throw Error("evalkit", "no keyframe has both ground truth and prediction");
  return rep;
}

void run_export(const fs::path& input, const fs::path& output, const fs::path& labels) {
  const std::string name = input.filename().string();
  if (name.size() >= 4 && name.substr(name.size() - 4) == ".occ") {
    occ::write_grid_ply(occ::read_grid(input), output);
    return;
  }
  if (name.size() >= 4 && name.substr(name.size() - 4) == ".bin") {
    const auto recs = dataset::read_point_bin(input);
    std::vector<Vec3> pts;
    for (const auto& r : recs) pts.emplace_back(r.x, r.y, r.z);
    std::vector<std::array<std::uint8_t, 3>> colors;
    if (!labels.empty()) {
      const auto l = dataset::read_lidarseg(labels);
      if (l.size() != pts.size()) throw IoError("label file does not match the point file");
      for (auto t : l) colors.push_back(occ::class_color(t));
    }
    densify::write_ply_points(pts, colors, output);
    return;
  }
  throw IoError("cannot export " + input.string() + ": expected a .occ grid or a .bin point file");
}

}  // namespace parkocc::app
