#include <gtest/gtest.h>

#include "parkocc/annotate/annotate.hpp"
#include "parkocc/error.hpp"
#include "parkocc/util/rng.hpp"
#include "oracles.hpp"

using namespace parkocc;
using namespace parkocc::annotate;
using sim::ObjectKind;
using sim::SceneModel;
using sim::Trajectory;
using testsupport::brute_visible;

namespace {

const Vec3 kCarHalf(2.3, 1.0, 0.8);

SceneModel open_scene() {
  SceneModel s;
  s.add_floor(0.0, 1);
  s.add_box(ObjectKind::ParkedCar, 14, Vec3(10, 0, 0.8), kCarHalf);
  return s;
}

}  // namespace

TEST(Visibility, LevelMapping) {
  const int expect[] = {1, 1, 2, 3, 4, 4};
  for (int c = 0; c <= 5; ++c) EXPECT_EQ(visibility_level(c), expect[c]);
  for (int c = 1; c <= 5; ++c) EXPECT_GE(visibility_level(c), visibility_level(c - 1));
}

TEST(Visibility, OpenSpaceFullyVisible) {
  const SceneModel s = open_scene();
  const auto r = compute_visibility(s, PoseSE3::identity(), 1, 0.0);
  EXPECT_EQ(r.visible_count, 5);
  EXPECT_EQ(r.level, 4);
}

TEST(Visibility, WallBlocksEverything) {
  SceneModel s = open_scene();
  s.add_box(ObjectKind::Wall, 4, Vec3(5, 0, 2), Vec3(0.2, 10, 2));
  const auto r = compute_visibility(s, PoseSE3::identity(), 1, 0.0);
  EXPECT_EQ(r.visible_count, 0);
  EXPECT_EQ(r.level, 1);
}

TEST(Visibility, HalfOccluderMatchesSlabOracle) {
  SceneModel s = open_scene();
  // Covers the +y half of the car as seen from the origin.
  s.add_box(ObjectKind::Wall, 4, Vec3(5, 1.0, 1.5), Vec3(0.2, 1.0, 1.5));
  const Vec3 origin = sim::LidarSpec{}.mount.translation();
  const int oracle = brute_visible(s, origin, 1);
  EXPECT_GT(oracle, 0);
  EXPECT_LT(oracle, 5);
  EXPECT_EQ(compute_visibility(s, PoseSE3::identity(), 1, 0.0).visible_count, oracle);
}

TEST(Visibility, RandomScenesMatchSlabOracle) {
  util::Rng rng(77);
  const Vec3 origin = sim::LidarSpec{}.mount.translation();
  for (int trial = 0; trial < 200; ++trial) {
    SceneModel s;
    s.add_floor(0.0, 1);
    const Vec3 c(rng.uniform(6, 20), rng.uniform(-8, 8), 0.8);
    const int target = s.add_box(ObjectKind::ParkedCar, 14, c, kCarHalf);
    const int n = static_cast<int>(rng.below(6));
    for (int k = 0; k < n; ++k) {
      const double f = rng.uniform(0.2, 0.8);
      const Vec3 at = f * c + Vec3(0, rng.uniform(-2, 2), 0);
      const Vec3 h(rng.uniform(0.1, 1), rng.uniform(0.1, 1.5), rng.uniform(0.3, 1.5));
      s.add_box(ObjectKind::Pillar, 6, Vec3(at.x(), at.y(), h.z()), h);
    }
    EXPECT_EQ(compute_visibility(s, PoseSE3::identity(), target, 0.0).visible_count,
              brute_visible(s, origin, target))
        << "trial " << trial;
  }
}

TEST(Visibility, RemovingOccluderNeverDecreases) {
  util::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    SceneModel s;
    s.add_floor(0.0, 1);
    const Vec3 c(rng.uniform(6, 20), rng.uniform(-8, 8), 0.8);
    const int target = s.add_box(ObjectKind::ParkedCar, 14, c, kCarHalf, rng.uniform(-90, 90));
    const int n = 1 + static_cast<int>(rng.below(5));
    for (int k = 0; k < n; ++k) {
      const Vec3 at = rng.uniform(0.2, 0.8) * c + Vec3(0, rng.uniform(-2, 2), 0);
      const Vec3 h(rng.uniform(0.1, 1), rng.uniform(0.1, 1.5), rng.uniform(0.3, 1.5));
      s.add_box(ObjectKind::StaticBox, 4, Vec3(at.x(), at.y(), h.z()), h, rng.uniform(-45, 45));
    }
    const int full = compute_visibility(s, PoseSE3::identity(), target, 0.0).visible_count;
    const int drop = target + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const SceneModel fewer = s.without(drop);
    EXPECT_GE(compute_visibility(fewer, PoseSE3::identity(), target, 0.0).visible_count, full);
  }
}

TEST(Visibility, InvariantUnderGlobalYaw) {
  sim::SceneConfig c;
  c.seed = 13;
  const SceneModel s = sim::build_parking_lot(c);
  const PoseSE3 g = PoseSE3::from_yaw(90, Vec3::Zero());
  const SceneModel r = s.transformed(g);
  for (double t : {0.0, 4.0, 9.0}) {
    const PoseSE3 ego = s.ego_trajectory().pose_at(t);
    const PoseSE3 ego_r = geom::pose_compose(g, ego);
    for (int idx : annotated_objects(s, false)) {
      EXPECT_EQ(compute_visibility(s, ego, idx, t).visible_count,
                compute_visibility(r, ego_r, idx, t).visible_count)
          << idx << " at " << t;
    }
  }
}

TEST(Visibility, DegenerateTargetRejected) {
  SceneModel s;
  s.add_floor(0.0, 1);
  EXPECT_THROW(compute_visibility(s, PoseSE3::identity(), 0, 0.0), Error);
  EXPECT_THROW(s.add_box(ObjectKind::StaticBox, 4, Vec3(5, 0, 1), Vec3(0, 1, 1)), Error);
  EXPECT_THROW(compute_visibility(s, PoseSE3::identity(), 3, 0.0), std::exception);
}

TEST(Boxes, SizeMapping) {
  SceneModel s;
  const int car = s.add_box(ObjectKind::ParkedCar, 14, Vec3(3, 4, 0.8), kCarHalf, 30);
  const int pillar = s.add_box(ObjectKind::Pillar, 6, Vec3(8, 8, 1.6), Vec3(0.3, 0.3, 1.6));
  const BoxGeometry b = box_from_object(s, car, 0.0);
  EXPECT_EQ(b.size, Vec3(2.0, 4.6, 1.6));
  EXPECT_NEAR(b.yaw, 30.0, 1e-12);
  const BoxGeometry p = box_from_object(s, pillar, 7.0);
  EXPECT_EQ(p.center, Vec3(8, 8, 1.6));
  EXPECT_EQ(p.yaw, 0.0);
}

TEST(Boxes, MovingCarFollowsTrajectory) {
  SceneModel s;
  const int car = s.add_dynamic_box(
      14, kCarHalf,
      Trajectory({{0.0, PoseSE3::from_translation(Vec3(0, 0, 0.8))},
                  {10.0, PoseSE3::from_translation(Vec3(20, 0, 0.8))}}));
  const BoxGeometry b = box_from_object(s, car, 5.0);
  EXPECT_LT((b.center - Vec3(10, 0, 0.8)).norm(), 1e-12);
  EXPECT_LT((b.center - sim::object_pose_at(s, car, 5.0).translation()).norm(), 1e-15);
}

TEST(Keyframes, OneAnnotationPerCar) {
  SceneModel s;
  s.add_floor(0.0, 1);
  for (int i = 0; i < 3; ++i) s.add_box(ObjectKind::ParkedCar, 14, Vec3(8, -6 + 6.0 * i, 0.8), kCarHalf);
  for (int i = 0; i < 2; ++i) {
    s.add_dynamic_box(14, kCarHalf,
                      Trajectory({{0.0, PoseSE3::from_translation(Vec3(-10, 4.0 * i, 0.8))},
                                  {10.0, PoseSE3::from_translation(Vec3(-20, 4.0 * i, 0.8))}}));
  }
  s.add_box(ObjectKind::Pillar, 6, Vec3(0, 8, 1.6), Vec3(0.3, 0.3, 1.6));
  const auto a = annotate_keyframe(s, PoseSE3::identity(), "s1", 1.0, "scene-0000");
  const auto b = annotate_keyframe(s, PoseSE3::identity(), "s2", 2.0, "scene-0000");
  ASSERT_EQ(a.size(), 5u);
  ASSERT_EQ(b.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].instance_token, b[i].instance_token);
    EXPECT_NE(a[i].sample_token, b[i].sample_token);
    EXPECT_EQ(a[i].category_name, "vehicle.car");
    for (const auto* ann : {&a[i], &b[i]}) {
      EXPECT_TRUE(ann->visibility_token >= "1" && ann->visibility_token <= "4");
      EXPECT_EQ(ann->visibility_token.size(), 1u);
    }
  }
  AnnotateOptions opt;
  opt.include_static = true;
  EXPECT_EQ(annotate_keyframe(s, PoseSE3::identity(), "s1", 1.0, "scene-0000", opt).size(), 6u);
}

TEST(Keyframes, VisibleBoxesContainTheirPoints) {
  sim::SceneConfig c;
  c.seed = 17;
  const SceneModel s = sim::build_parking_lot(c);
  sim::LidarSpec spec;
  spec.azimuth_steps = 1800;
  for (double t : {0.9, 5.9}) {
    const PoseSE3 ego = s.ego_trajectory().pose_at(t);
    const auto scan = sim::simulate_scan(s, ego, spec, t);
    const auto ann = annotate_keyframe(s, ego, "x", t, "scene-0000");
    for (const auto& a : ann) {
      const double range = (a.box.center - scan.sensor_in_world.translation()).norm();
      if (a.visibility.visible_count == 0 || range > spec.range) continue;
      const auto& obj = s.object(a.object_index);
      const PoseSE3 pose = sim::object_pose_at(s, a.object_index, t);
      int inside = 0;
      for (const auto& p : scan.points) {
        if (p.hit.object_index != a.object_index) continue;
        inside += sim::box_contains(obj, pose, scan.sensor_in_world.apply(p.hit.point), 1e-6);
      }
      EXPECT_GE(inside, 1) << "object " << a.object_index << " at " << t;
    }
  }
}
