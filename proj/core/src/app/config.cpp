#include "parkocc/app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "parkocc/error.hpp"

namespace parkocc::app {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void RunConfig::validate() const {
  if (output.empty()) throw ConfigError("output must not be empty");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  collect.validate();
  scene_config(0).validate();
  gt.validate();
  if (gt.densify.poisson.cell_size <= 0 && gt.densify.poisson.resolution < 8) {
    throw ConfigError("poisson resolution must be >= 8");
  }
}

sim::SceneConfig RunConfig::scene_config(int scene_index) const {
  sim::SceneConfig s = scene;
  s.seed = derive_seed(seed, static_cast<std::uint64_t>(scene_index));
  s.fixed_dt = collect.fixed_dt;
  s.scene_duration = collect.frames_per_scene * collect.fixed_dt;
  return s;
}

namespace {

bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

class Section {
 public:
  Section(const YAML::Node& node, std::string name) : name_(std::move(name)) {
    if (!present(node)) return;
    if (!node.IsMap()) throw ConfigError(name_ + " must be a mapping");
    node_ = node;
    has_ = true;
  }
  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!has_ || !present(node_[key])) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("bad value for " + path(key));
    }
  }
  YAML::Node child(const char* key) {
    seen_.insert(key);
    return has_ ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
  }
  std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    if (!has_) return;
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!seen_.count(k)) throw ConfigError("unknown config key " + path(k));
    }
  }

 private:
  YAML::Node node_;
  bool has_ = false;
  std::string name_;
  std::set<std::string> seen_;
};

Vec3 read_vec3(const YAML::Node& n, const std::string& key, const Vec3& fallback) {
  if (!present(n)) return fallback;
  if (!n.IsSequence() || n.size() != 3) throw ConfigError(key + " must be a list of three numbers");
  try {
    return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(key + " must be a list of three numbers");
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  RunConfig c;
  if (root.IsNull()) {
    c.validate();
    return c;
  }
  Section top(root, "");
  std::string output = c.output.string();
  top.read("output", output);
  c.output = output;
  top.read("seed", c.seed);
  top.read("jobs", c.jobs);

  Section col(top.child("collect"), "collect");
  col.read("scene_count", c.collect.scene_count);
  col.read("frames_per_scene", c.collect.frames_per_scene);
  col.read("fixed_dt", c.collect.fixed_dt);
  col.read("keyframe_interval", c.collect.keyframe_interval);
  col.read("annotate_static", c.collect.annotate_static);
  col.finish();

  Section sc(top.child("scene"), "scene");
  sc.read("lot_width", c.scene.lot_width);
  sc.read("lot_length", c.scene.lot_length);
  sc.read("ceiling_height", c.scene.ceiling_height);
  sc.read("pillar_spacing", c.scene.pillar_spacing);
  sc.read("pillar_cross_section", c.scene.pillar_cross_section);
  sc.read("parked_car_density", c.scene.parked_car_density);
  sc.read("dynamic_car_count", c.scene.dynamic_car_count);
  sc.read("wall_thickness", c.scene.wall_thickness);
  sc.read("vehicle_speed", c.scene.vehicle_speed);
  sc.finish();

  auto& lidar = c.collect.sensors.lidar;
  Section li(top.child("lidar"), "lidar");
  li.read("channels", lidar.channels);
  li.read("range", lidar.range);
  li.read("horizontal_fov", lidar.horizontal_fov);
  li.read("vfov_lower", lidar.vfov_lower);
  li.read("vfov_upper", lidar.vfov_upper);
  li.read("azimuth_steps", lidar.azimuth_steps);
  double mount_height = lidar.mount.translation().z();
  li.read("mount_height", mount_height);
  lidar.mount = geom::PoseSE3::from_translation(Vec3(0, 0, mount_height));
  li.finish();

  Section gr(top.child("grid"), "grid");
  occ::GridSpec grid;
  grid.origin = read_vec3(gr.child("origin"), "grid.origin", grid.origin);
  gr.read("voxel_size", grid.voxel_size);
  if (const auto d = gr.child("dims"); present(d)) {
    if (!d.IsSequence() || d.size() != 3) throw ConfigError("grid.dims must be a list of three integers");
    try {
      for (int a = 0; a < 3; ++a) grid.dims[a] = d[a].as<int>();
    } catch (const YAML::Exception&) {
      throw ConfigError("grid.dims must be a list of three integers");
    }
  }
  gr.finish();
  grid.validate();
  c.gt = occ::GtConfig::for_grid(grid);

  auto& po = c.gt.densify.poisson;
  Section ps(top.child("poisson"), "poisson");
  ps.read("resolution", po.resolution);
  ps.read("cell_size", po.cell_size);
  ps.read("padding", po.padding);
  ps.read("smoothing", po.smoothing);
  ps.read("trim_radius", po.trim_radius);
  ps.read("tolerance", po.solver.tolerance);
  ps.read("max_iterations", po.solver.max_iterations);
  ps.finish();

  Section de(top.child("densify"), "densify");
  de.read("normal_k", c.gt.densify.normal_k);
  de.read("max_edge", c.gt.densify.max_edge);
  de.read("downsample", c.gt.densify.downsample);
  de.read("tile_size", c.gt.densify.tiles.size);
  de.read("tile_overlap", c.gt.densify.tiles.overlap);
  de.read("split_margin", c.gt.split_margin);
  de.finish();

  Section ev(top.child("eval"), "eval");
  std::string mode = "present";
  ev.read("miou_mode", mode);
  ev.finish();
  if (mode == "present") {
    c.miou_mode = eval::MiouMode::Present;
  } else if (mode == "fixed") {
    c.miou_mode = eval::MiouMode::Fixed;
  } else {
    throw ConfigError("eval.miou_mode must be present or fixed");
  }
  top.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "output" << YAML::Value << c.output.string();
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "jobs" << YAML::Value << c.jobs;
  e << YAML::Key << "collect" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "scene_count" << YAML::Value << c.collect.scene_count;
  e << YAML::Key << "frames_per_scene" << YAML::Value << c.collect.frames_per_scene;
  e << YAML::Key << "fixed_dt" << YAML::Value << c.collect.fixed_dt;
  e << YAML::Key << "keyframe_interval" << YAML::Value << c.collect.keyframe_interval;
  e << YAML::Key << "annotate_static" << YAML::Value << c.collect.annotate_static;
  e << YAML::EndMap;
  e << YAML::Key << "scene" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "lot_width" << YAML::Value << c.scene.lot_width;
  e << YAML::Key << "lot_length" << YAML::Value << c.scene.lot_length;
  e << YAML::Key << "ceiling_height" << YAML::Value << c.scene.ceiling_height;
  e << YAML::Key << "pillar_spacing" << YAML::Value << c.scene.pillar_spacing;
  e << YAML::Key << "pillar_cross_section" << YAML::Value << c.scene.pillar_cross_section;
  e << YAML::Key << "parked_car_density" << YAML::Value << c.scene.parked_car_density;
  e << YAML::Key << "dynamic_car_count" << YAML::Value << c.scene.dynamic_car_count;
  e << YAML::Key << "wall_thickness" << YAML::Value << c.scene.wall_thickness;
  e << YAML::Key << "vehicle_speed" << YAML::Value << c.scene.vehicle_speed;
  e << YAML::EndMap;
  const auto& l = c.collect.sensors.lidar;
  e << YAML::Key << "lidar" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "channels" << YAML::Value << l.channels;
  e << YAML::Key << "range" << YAML::Value << l.range;
  e << YAML::Key << "horizontal_fov" << YAML::Value << l.horizontal_fov;
  e << YAML::Key << "vfov_lower" << YAML::Value << l.vfov_lower;
  e << YAML::Key << "vfov_upper" << YAML::Value << l.vfov_upper;
  e << YAML::Key << "azimuth_steps" << YAML::Value << l.azimuth_steps;
  e << YAML::Key << "mount_height" << YAML::Value << l.mount.translation().z();
  e << YAML::EndMap;
  const auto& g = c.gt.grid;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "origin" << YAML::Value << YAML::Flow << YAML::BeginSeq << g.origin.x() << g.origin.y()
    << g.origin.z() << YAML::EndSeq;
  e << YAML::Key << "voxel_size" << YAML::Value << g.voxel_size;
  e << YAML::Key << "dims" << YAML::Value << YAML::Flow << YAML::BeginSeq << g.dims[0] << g.dims[1] << g.dims[2]
    << YAML::EndSeq;
  e << YAML::EndMap;
  const auto& p = c.gt.densify.poisson;
  e << YAML::Key << "poisson" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "resolution" << YAML::Value << p.resolution;
  e << YAML::Key << "cell_size" << YAML::Value << p.cell_size;
  e << YAML::Key << "padding" << YAML::Value << p.padding;
  e << YAML::Key << "smoothing" << YAML::Value << p.smoothing;
  e << YAML::Key << "trim_radius" << YAML::Value << p.trim_radius;
  e << YAML::Key << "tolerance" << YAML::Value << p.solver.tolerance;
  e << YAML::Key << "max_iterations" << YAML::Value << p.solver.max_iterations;
  e << YAML::EndMap;
  const auto& d = c.gt.densify;
  e << YAML::Key << "densify" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "normal_k" << YAML::Value << d.normal_k;
  e << YAML::Key << "max_edge" << YAML::Value << d.max_edge;
  e << YAML::Key << "downsample" << YAML::Value << d.downsample;
  e << YAML::Key << "tile_size" << YAML::Value << d.tiles.size;
  e << YAML::Key << "tile_overlap" << YAML::Value << d.tiles.overlap;
  e << YAML::Key << "split_margin" << YAML::Value << c.gt.split_margin;
  e << YAML::EndMap;
  e << YAML::Key << "eval" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "miou_mode" << YAML::Value
    << (c.miou_mode == eval::MiouMode::Present ? "present" : "fixed");
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace parkocc::app
