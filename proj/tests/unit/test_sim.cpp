#include <gtest/gtest.h>

#include <cmath>

#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/error.hpp"
#include "parkocc/sim/analytic.hpp"
#include "parkocc/sim/lidar.hpp"
#include "parkocc/util/rng.hpp"

using namespace parkocc;
using namespace parkocc::sim;
using geom::PoseSE3;
using geom::Vec3;

namespace {

// Independent slab test on an axis-aligned box; returns the entry distance.
std::optional<double> slab(const Vec3& lo, const Vec3& hi, const Vec3& o, const Vec3& d) {
  double t0 = 0.0, t1 = 1e300;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return std::nullopt;
  return t0;
}

// Distance from p to the surface of an oriented box.
double box_surface_distance(const SceneObject& b, const PoseSE3& pose, const Vec3& p) {
  const Vec3 q = pose.apply_inverse(p);
  const Vec3 d = q.cwiseAbs() - b.half_extents;
  const Vec3 outside = d.cwiseMax(0.0);
  const double inside = std::min(d.maxCoeff(), 0.0);
  return std::abs(outside.norm() + inside);
}

double scene_surface_distance(const SceneModel& s, const Vec3& p, double t) {
  double best = 1e300;
  for (const auto& o : s.objects()) {
    if (o.is_plane()) {
      best = std::min(best, std::abs(p.z() - o.pose.translation().z()));
    } else {
      best = std::min(best, box_surface_distance(o, object_pose_at(s, o.index, t), p));
    }
  }
  return best;
}

SceneModel closed_room() {
  SceneModel s;
  s.add_floor(0.0, 1);
  s.add_ceiling(4.0, 3);
  s.add_box(ObjectKind::Wall, 4, Vec3(-10, 0, 2), Vec3(0.5, 11, 2));
  s.add_box(ObjectKind::Wall, 4, Vec3(10, 0, 2), Vec3(0.5, 11, 2));
  s.add_box(ObjectKind::Wall, 4, Vec3(0, -10, 2), Vec3(11, 0.5, 2));
  s.add_box(ObjectKind::Wall, 4, Vec3(0, 10, 2), Vec3(11, 0.5, 2));
  return s;
}

bool same_scene(const SceneModel& a, const SceneModel& b) {
  if (a.objects().size() != b.objects().size()) return false;
  for (std::size_t i = 0; i < a.objects().size(); ++i) {
    const auto& x = a.objects()[i];
    const auto& y = b.objects()[i];
    if (x.kind != y.kind || x.source_tag != y.source_tag || x.half_extents != y.half_extents ||
        geom::pose_distance(x.pose, y.pose) != 0.0 || x.is_dynamic() != y.is_dynamic()) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Lot, Deterministic) {
  SceneConfig c;
  c.seed = 42;
  EXPECT_TRUE(same_scene(build_parking_lot(c), build_parking_lot(c)));
  SceneConfig d = c;
  d.seed = 43;
  EXPECT_FALSE(same_scene(build_parking_lot(c), build_parking_lot(d)));
}

TEST(Lot, PillarCountFollowsGrid) {
  SceneConfig c;
  c.lot_width = 40;
  c.lot_length = 60;
  c.pillar_spacing = 8;
  const SceneModel s = build_parking_lot(c);
  int pillars = 0;
  for (const auto& o : s.objects()) pillars += o.kind == ObjectKind::Pillar;
  int nx = 0, ny = 0;
  for (double x = 8; x + 8 <= 40 + 1e-9; x += 8) ++nx;
  for (double y = 8; y + 8 <= 60 + 1e-9; y += 8) ++ny;
  EXPECT_EQ(pillars, nx * ny);
  EXPECT_EQ(pillars, static_cast<int>(std::floor(40.0 / 8 - 1)) * static_cast<int>(std::floor(60.0 / 8 - 1)));
}

TEST(Lot, EmptyLotHasOnlyStructure) {
  SceneConfig c;
  c.parked_car_density = 0;
  c.dynamic_car_count = 0;
  const SceneModel s = build_parking_lot(c);
  for (const auto& o : s.objects()) {
    EXPECT_TRUE(o.kind == ObjectKind::Floor || o.kind == ObjectKind::Ceiling ||
                o.kind == ObjectKind::Wall || o.kind == ObjectKind::Pillar)
        << to_string(o.kind);
  }
}

TEST(Lot, StaticBoxesDoNotOverlap) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SceneConfig c;
    c.seed = seed;
    c.parked_car_density = 1.0;
    const SceneModel s = build_parking_lot(c);
    const auto& objs = s.objects();
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (objs[i].is_plane() || objs[i].is_dynamic()) continue;
      for (std::size_t j = i + 1; j < objs.size(); ++j) {
        if (objs[j].is_plane() || objs[j].is_dynamic()) continue;
        EXPECT_FALSE(boxes_overlap(objs[i], objs[j])) << i << " " << j;
      }
    }
  }
}

TEST(Lot, InfeasibleConfigNamesConstraint) {
  SceneConfig c;
  c.lot_width = 12;
  try {
    build_parking_lot(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lot_width"), std::string::npos);
  }
  SceneConfig d;
  d.pillar_spacing = -1;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Trajectory, LinearInterpolation) {
  SceneModel s;
  const int i = s.add_dynamic_box(14, Vec3(2.3, 1, 0.8),
                                  Trajectory({{0.0, PoseSE3::from_translation(Vec3(0, 0, 0.8))},
                                              {10.0, PoseSE3::from_translation(Vec3(10, 0, 0.8))}}));
  EXPECT_NEAR(object_pose_at(s, i, 5.0).translation().x(), 5.0, 1e-12);
  EXPECT_THROW(object_pose_at(s, i, 10.5), Error);
}

TEST(Trajectory, StaticObjectKeepsPlacement) {
  SceneModel s;
  const int i = s.add_box(ObjectKind::Pillar, 6, Vec3(8, 8, 1.6), Vec3(0.3, 0.3, 1.6));
  for (double t : {0.0, 3.3, 100.0}) {
    EXPECT_EQ(object_pose_at(s, i, t).translation(), Vec3(8, 8, 1.6));
    EXPECT_EQ(object_pose_at(s, i, t).yaw_deg(), 0.0);
  }
}

TEST(Trajectory, YawShortestArc) {
  // Brute search over candidate headings for the one halfway along the shorter arc.
  auto ang_dist = [](double a, double b) {
    return std::abs(geom::normalize_deg(a - b));
  };
  for (auto [a, b] : {std::pair{170.0, -170.0}, {-170.0, 170.0}, {10.0, 80.0}, {-90.0, 120.0}}) {
    double best = 0, best_err = 1e300;
    const double half = 0.5 * ang_dist(a, b);
    for (int k = -1800; k <= 1800; ++k) {
      const double c = k * 0.1;
      const double err = std::abs(ang_dist(a, c) - half) + std::abs(ang_dist(c, b) - half);
      if (err < best_err - 1e-12) {
        best_err = err;
        best = c;
      }
    }
    EXPECT_LT(ang_dist(interpolate_yaw_deg(a, b, 0.5), best), 1e-6) << a << " " << b;
  }
  EXPECT_NEAR(std::abs(interpolate_yaw_deg(170, -170, 0.5)), 180.0, 1e-9);
}

TEST(Raycast, StraightDownHitsFloor) {
  SceneModel s;
  s.add_floor(0.0, 1);
  const auto h = cast_ray(s, Vec3(0, 0, 2), Vec3(0, 0, -1), 80, 0);
  ASSERT_TRUE(h);
  EXPECT_DOUBLE_EQ(h->distance, 2.0);
  EXPECT_DOUBLE_EQ(h->incidence_cosine, 1.0);
  EXPECT_EQ(h->semantic_tag, 1);
}

TEST(Raycast, MissAwayFromGeometry) {
  SceneModel s;
  s.add_floor(0.0, 1);
  s.add_box(ObjectKind::Wall, 4, Vec3(10, 0, 2), Vec3(0.5, 5, 2));
  EXPECT_FALSE(cast_ray(s, Vec3(0, 0, 2), Vec3(-1, 0, 0), 80, 0));
  EXPECT_FALSE(cast_ray(s, Vec3(0, 0, 2), Vec3(0, 0, 1), 80, 0));
  EXPECT_THROW(cast_ray(s, Vec3(0, 0, 2), Vec3(1, 1, 0), 80, 0), Error);
}

TEST(Raycast, ElevatedRayMatchesSlab) {
  SceneModel s;
  const Vec3 c(10, 0, 3), h(0.5, 6, 3);
  s.add_box(ObjectKind::Wall, 4, c, h);
  const double el = geom::deg2rad(30.0);
  util::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const double az = geom::deg2rad(rng.uniform(-25, 25));
    const Vec3 d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    const Vec3 o(0, 0, rng.uniform(0.5, 2.0));
    const auto expect = slab(c - h, c + h, o, d);
    const auto hit = cast_ray(s, o, d, 80, 0);
    ASSERT_EQ(expect.has_value(), hit.has_value());
    if (hit) {
      EXPECT_NEAR(hit->distance, *expect, 1e-9);
      EXPECT_LT((hit->point - (o + *expect * d)).norm(), 1e-9);
      EXPECT_EQ(hit->semantic_tag, 4);
    }
  }
}

TEST(Raycast, HitsLieOnSurfaces) {
  SceneConfig c;
  c.seed = 9;
  const SceneModel s = build_parking_lot(c);
  util::Rng rng(2);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const double t = rng.uniform(0, 19);
    const Vec3 o = s.ego_trajectory().pose_at(t).translation() + Vec3(0, 0, 2);
    Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (d.norm() < 1e-3) continue;
    d.normalize();
    const auto h = cast_ray(s, o, d, 80, t);
    if (!h) continue;
    ++hits;
    EXPECT_LT(scene_surface_distance(s, o + h->distance * d, t), 1e-6);
    EXPECT_GE(h->incidence_cosine, 0.0);
    EXPECT_LE(h->incidence_cosine, 1.0);
  }
  EXPECT_GT(hits, 1900);
}

TEST(Lidar, ClosedRoomEveryRayHits) {
  LidarSpec spec;
  spec.channels = 16;
  spec.azimuth_steps = 360;
  const SemanticScan scan = simulate_scan(closed_room(), PoseSE3::identity(), spec, 0);
  EXPECT_EQ(scan.points.size(), static_cast<std::size_t>(spec.channels * spec.azimuth_steps));
}

TEST(Lidar, EmptySceneNoPoints) {
  EXPECT_TRUE(simulate_scan(SceneModel{}, PoseSE3::identity(), LidarSpec{}, 0).points.empty());
}

TEST(Lidar, FloorAtLowestChannel) {
  SceneModel s;
  s.add_floor(0.0, 1);
  LidarSpec spec;
  spec.channels = 32;
  spec.azimuth_steps = 90;
  EXPECT_DOUBLE_EQ(spec.elevation_deg(0), -30.0);
  EXPECT_DOUBLE_EQ(spec.elevation_deg(spec.channels - 1), 10.0);
  const SemanticScan scan = simulate_scan(s, PoseSE3::identity(), spec, 0);
  int n = 0;
  for (const auto& p : scan.points) {
    if (p.channel != 0) continue;
    ++n;
    EXPECT_NEAR(p.hit.distance, 2.0 / std::sin(geom::deg2rad(30.0)), 1e-9);
  }
  EXPECT_EQ(n, spec.azimuth_steps);
  EXPECT_LE(scan.points.size(), static_cast<std::size_t>(spec.channels * spec.azimuth_steps));
}

TEST(Lidar, DeterministicAndIndependentOfJobs) {
  SceneConfig c;
  c.seed = 4;
  const SceneModel s = build_parking_lot(c);
  LidarSpec spec;
  spec.channels = 16;
  spec.azimuth_steps = 300;
  const PoseSE3 ego = s.ego_trajectory().pose_at(3.0);
  const auto a = simulate_scan(s, ego, spec, 3.0, 1);
  const auto b = simulate_scan(build_parking_lot(c), ego, spec, 3.0, 4);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].hit.point, b.points[i].hit.point);
    EXPECT_EQ(a.points[i].hit.object_index, b.points[i].hit.object_index);
    EXPECT_EQ(a.points[i].channel, b.points[i].channel);
    EXPECT_EQ(a.points[i].azimuth, b.points[i].azimuth);
  }
  for (std::size_t i = 1; i < a.points.size(); ++i) {
    const auto& p = a.points[i - 1];
    const auto& q = a.points[i];
    EXPECT_TRUE(p.channel < q.channel || (p.channel == q.channel && p.azimuth < q.azimuth));
  }
}

TEST(Lidar, MappedLabelsInTagSet) {
  SceneConfig c;
  c.seed = 5;
  const SceneModel s = build_parking_lot(c);
  LidarSpec spec;
  spec.channels = 16;
  spec.azimuth_steps = 200;
  const auto scan = simulate_scan(s, s.ego_trajectory().pose_at(1.0), spec, 1.0);
  for (const auto& p : scan.points) {
    EXPECT_TRUE(dataset::is_nuscenes_tag(dataset::map_semantic_tag(p.hit.semantic_tag).nuscenes_tag));
  }
}

TEST(Analytic, WallCarAndAir) {
  SceneModel s;
  s.add_floor(0.0, 1);
  s.add_box(ObjectKind::Wall, 4, Vec3(5, 0, 1.5), Vec3(0.5, 3, 1.5));
  s.add_box(ObjectKind::ParkedCar, 14, Vec3(0, 5, 0.8), Vec3(2.3, 1.0, 0.8));
  occ::GridSpec g;
  g.origin = Vec3(-10, -10, -1);
  g.voxel_size = 0.5;
  g.dims = {40, 40, 10};
  const occ::VoxelGrid v = analytic_occupancy(s, g, 0.0);
  const auto wall = g.cell_of(Vec3(5.1, 0.1, 1.1));
  const auto car = g.cell_of(Vec3(0.1, 5.1, 0.6));
  const auto air = g.cell_of(Vec3(0.1, 0.1, 2.1));
  const auto floor = g.cell_of(Vec3(0.1, 0.1, -0.4));
  EXPECT_TRUE(v.is_occupied(g.linear(wall)));
  EXPECT_EQ(v.label[g.linear(wall)], 28);
  EXPECT_TRUE(v.is_occupied(g.linear(car)));
  EXPECT_EQ(v.label[g.linear(car)], 17);
  EXPECT_FALSE(v.is_occupied(g.linear(air)));
  EXPECT_TRUE(v.is_occupied(g.linear(floor)));
  EXPECT_EQ(v.label[g.linear(floor)], 24);
}

TEST(Analytic, MonotoneUnderUnion) {
  util::Rng rng(21);
  occ::GridSpec g;
  g.origin = Vec3(-8, -8, -0.5);
  g.voxel_size = 0.25;
  g.dims = {64, 64, 16};
  for (int trial = 0; trial < 20; ++trial) {
    SceneModel s;
    s.add_floor(0.0, 1);
    const int n = 1 + static_cast<int>(rng.below(5));
    for (int k = 0; k < n; ++k) {
      s.add_box(ObjectKind::StaticBox, 4, Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), 1),
                Vec3(rng.uniform(0.2, 2), rng.uniform(0.2, 2), 1), rng.uniform(-90, 90));
    }
    const occ::VoxelGrid before = analytic_occupancy(s, g, 0);
    s.add_box(ObjectKind::ParkedCar, 14, Vec3(rng.uniform(-6, 6), rng.uniform(-6, 6), 0.8),
              Vec3(2.3, 1.0, 0.8), rng.uniform(-90, 90));
    const occ::VoxelGrid after = analytic_occupancy(s, g, 0);
    for (std::size_t i = 0; i < g.count(); ++i) {
      if (before.is_occupied(i)) EXPECT_TRUE(after.is_occupied(i));
    }
  }
}

TEST(Scene, TransformedKeepsRayDistances) {
  SceneConfig c;
  c.seed = 7;
  const SceneModel s = build_parking_lot(c);
  const PoseSE3 rot = PoseSE3::from_yaw(90, Vec3(3, -2, 0));
  const SceneModel r = s.transformed(rot);
  util::Rng rng(3);
  for (int i = 0; i < 300; ++i) {
    const Vec3 o = s.ego_trajectory().pose_at(2.0).translation() + Vec3(0, 0, 2);
    Vec3 d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.5, 0.5));
    d.normalize();
    const auto a = cast_ray(s, o, d, 80, 2.0);
    const auto b = cast_ray(r, rot.apply(o), rot.rotate(d).normalized(), 80, 2.0);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) {
      EXPECT_NEAR(a->distance, b->distance, 1e-6);
      EXPECT_EQ(a->object_index, b->object_index);
    }
  }
}
