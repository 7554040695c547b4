#include "parkocc/occ/gt.hpp"

#include "parkocc/error.hpp"
#include "parkocc/occ/voxelize.hpp"

namespace parkocc::occ {

GtConfig GtConfig::for_grid(const GridSpec& grid) {
  GtConfig c;
  c.grid = grid;
  c.densify.poisson.cell_size = grid.voxel_size / 2;
  c.densify.max_edge = grid.voxel_size / 2;
  return c;
}

void GtConfig::validate() const {
  grid.validate();
  densify.validate();
  if (split_margin < 0) throw ConfigError("split_margin must be >= 0");
}

DenseScene densify_scene(const stitch::AggregatedScene& agg, const GtConfig& cfg, int jobs) {
  cfg.validate();
  DenseScene out;
  try {
    out.static_world = densify::densify_cloud(agg.static_world, cfg.densify, jobs);
    for (const auto& [idx, cloud] : agg.objects) {
      out.objects[idx] = densify::densify_cloud(cloud, cfg.densify, jobs);
    }
  } catch (const Error& e) {
    if (e.stage() == "densify") throw;
    throw Error("densify", e.what());
  }
  return out;
}

namespace {

void mark(VoxelGrid& g, const std::vector<Vec3>& pts, const PoseSE3& pose) {
  for (const auto& p : pts) {
    if (const auto c = g.spec.locate(pose.apply(p))) {
      const auto i = g.spec.linear(*c);
      if (!g.occupied[i]) g.set(i, kUnlabeled);
    }
  }
}

}  // namespace

KeyframeGt keyframe_gt(const stitch::AggregatedScene& agg, const DenseScene& dense,
                       const stitch::KeyPose& key, const GridSpec& spec, int jobs) {
  spec.validate();
  const PoseSE3 world_sensor =
      geom::pose_inverse(geom::chain_to_world(key.sensor_pose, key.ego_pose));

  VoxelGrid occupancy(spec);
  std::vector<Vec3> labeled;
  std::vector<std::uint8_t> labels;
  auto add_sparse = [&](const stitch::LabeledCloud& c, const PoseSE3& to_key) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Vec3 p = to_key.apply(c.points[i]);
      const auto cell = spec.locate(p);
      if (!cell) continue;
      const auto v = spec.linear(*cell);
      if (!occupancy.occupied[v]) occupancy.set(v, kUnlabeled);
      if (c.labels[i] != kUnlabeled) {
        labeled.push_back(p);
        labels.push_back(c.labels[i]);
      }
    }
  };
  add_sparse(agg.static_world, world_sensor);
  mark(occupancy, dense.static_world, world_sensor);
  for (const auto& [idx, cloud] : agg.objects) {
    const auto it = key.box_poses.find(idx);
    if (it == key.box_poses.end()) continue;
    const PoseSE3 to_key = geom::pose_compose(world_sensor, it->second);
    add_sparse(cloud, to_key);
    if (const auto d = dense.objects.find(idx); d != dense.objects.end()) mark(occupancy, d->second, to_key);
  }

  KeyframeGt out;
  out.semantic = voxelize(labeled, labels, spec);
  if (out.semantic.occupied_count() == 0) {
    throw Error("occgrid", "no labeled points inside the grid for keyframe " + key.sample_token);
  }
  out.gt = nn_label_transfer(occupancy, out.semantic, jobs);
  return out;
}

VoxelGrid build_dense_gt(const std::vector<stitch::FrameInput>& frames, std::size_t key_index,
                         const GtConfig& cfg, int jobs) {
  if (key_index >= frames.size()) throw Error("occgrid", "key_index out of range");
  cfg.validate();
  stitch::AggregatedScene agg;
  try {
    agg = stitch::aggregate_sequence(frames, cfg.split_margin);
  } catch (const Error& e) {
    throw Error("stitchfuse", e.what());
  }
  const DenseScene dense = densify_scene(agg, cfg, jobs);
  const auto& kf = frames[key_index];
  stitch::KeyPose key;
  key.ego_pose = kf.ego_pose;
  key.sensor_pose = kf.sensor_pose;
  for (const auto& b : kf.boxes) key.box_poses[b.object_index] = b.pose;
  return keyframe_gt(agg, dense, key, cfg.grid, jobs).gt;
}

}  // namespace parkocc::occ
