#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "parkocc/error.hpp"
#include "parkocc/eval/metrics.hpp"
#include "parkocc/occ/io.hpp"
#include "parkocc/util/rng.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace parkocc;
using namespace parkocc::eval;
using geom::Vec3;
using occ::GridSpec;
using occ::VoxelGrid;
namespace fs = std::filesystem;

namespace {

GridSpec cube4() {
  GridSpec s;
  s.origin = Vec3(0, 0, 0);
  s.voxel_size = 1.0;
  s.dims = {4, 4, 4};
  return s;
}

VoxelGrid random_grid(util::Rng& rng, const GridSpec& s, double fill, std::vector<std::uint8_t> tags) {
  VoxelGrid g(s);
  for (std::size_t i = 0; i < s.count(); ++i) {
    if (rng.uniform01() < fill) g.set(i, tags[rng.below(tags.size())]);
  }
  return g;
}

void put(const fs::path& dir, const std::string& scene, const std::string& sample, const VoxelGrid& g) {
  const fs::path p = dir / grid_relpath(scene, sample);
  fs::create_directories(p.parent_path());
  occ::write_grid(g, p);
}

}  // namespace

TEST(Confusion, IdenticalGrids) {
  util::Rng rng(1);
  const VoxelGrid g = random_grid(rng, cube4(), 0.4, {17, 28});
  const ConfusionCounts c = confusion(g, g);
  EXPECT_EQ(c.binary, (Counts{g.occupied_count(), 0, 0}));
  EXPECT_DOUBLE_EQ(iou(c), 1.0);
  EXPECT_DOUBLE_EQ(*miou(c), 1.0);
}

TEST(Confusion, DisjointSets) {
  VoxelGrid p(cube4()), g(cube4());
  for (std::size_t i : {0, 1, 2}) p.set(i, 17);
  for (std::size_t i : {10, 11, 12, 13}) g.set(i, 17);
  EXPECT_EQ(confusion(p, g).binary, (Counts{0, 3, 4}));
  EXPECT_DOUBLE_EQ(iou(confusion(p, g)), 0.0);
}

TEST(Confusion, OneThird) {
  VoxelGrid p(cube4()), g(cube4());
  p.set(0, 17);  // A
  p.set(1, 17);  // B
  g.set(1, 17);  // B
  g.set(2, 17);  // C
  const ConfusionCounts c = confusion(p, g);
  EXPECT_EQ(c.binary, (Counts{1, 1, 1}));
  EXPECT_DOUBLE_EQ(iou(c), 1.0 / 3.0);
}

TEST(Confusion, MislabelCountsBothClasses) {
  VoxelGrid p(cube4()), g(cube4());
  p.set(5, 17);
  g.set(5, 28);
  const ConfusionCounts c = confusion(p, g);
  EXPECT_EQ(c.binary, (Counts{1, 0, 0}));
  EXPECT_EQ(c.per_class[17], (Counts{0, 1, 0}));
  EXPECT_EQ(c.per_class[28], (Counts{0, 0, 1}));
}

TEST(Confusion, SpecMismatchThrows) {
  GridSpec other = cube4();
  other.voxel_size = 0.5;
  EXPECT_THROW(confusion(VoxelGrid(cube4()), VoxelGrid(other)), Error);
}

TEST(Metrics, EmptyGridsScoreOne) {
  const ConfusionCounts c = confusion(VoxelGrid(cube4()), VoxelGrid(cube4()));
  EXPECT_DOUBLE_EQ(iou(c), 1.0);
  EXPECT_FALSE(miou(c).has_value());
}

TEST(Metrics, MeanOfHalfAndOne) {
  // Class 17: TP 1, FP 1. Class 28: TP 2.
  VoxelGrid p(cube4()), g(cube4());
  p.set(0, 17);
  g.set(0, 17);
  p.set(1, 17);
  for (std::size_t i : {2, 3}) {
    p.set(i, 28);
    g.set(i, 28);
  }
  const ConfusionCounts c = confusion(p, g);
  EXPECT_DOUBLE_EQ(iou(c.per_class[17]), 0.5);
  EXPECT_DOUBLE_EQ(iou(c.per_class[28]), 1.0);
  EXPECT_DOUBLE_EQ(*miou(c), 0.75);
}

TEST(Metrics, CraftedGridsMatchEnumeration) {
  util::Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const VoxelGrid p = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    const VoxelGrid g = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    const auto m = testsupport::enumerate_confusion(p, g);
    const ConfusionCounts c = confusion(p, g);
    double sum = 0;
    for (const auto& [cls, k] : m) {
      EXPECT_EQ(c.per_class[cls], (Counts{static_cast<std::uint64_t>(k[0]), static_cast<std::uint64_t>(k[1]),
                                          static_cast<std::uint64_t>(k[2])}));
      sum += static_cast<double>(k[0]) / static_cast<double>(k[0] + k[1] + k[2]);
    }
    EXPECT_EQ(c.present_classes().size(), m.size());
    if (!m.empty()) EXPECT_DOUBLE_EQ(*miou(c), sum / static_cast<double>(m.size()));
    std::uint64_t both = 0, ponly = 0, gonly = 0;
    for (std::size_t i = 0; i < 64; ++i) {
      both += p.occupied[i] && g.occupied[i];
      ponly += p.occupied[i] && !g.occupied[i];
      gonly += !p.occupied[i] && g.occupied[i];
    }
    EXPECT_EQ(c.binary, (Counts{both, ponly, gonly}));
    for (const auto& [cls, k] : m) EXPECT_GE(c.binary.tp, static_cast<std::uint64_t>(k[0]));
  }
}

TEST(Metrics, SymmetricAndBounded) {
  util::Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const VoxelGrid p = random_grid(rng, cube4(), rng.uniform01(), {17, 28});
    const VoxelGrid g = random_grid(rng, cube4(), rng.uniform01(), {17, 28});
    const auto a = confusion(p, g), b = confusion(g, p);
    EXPECT_DOUBLE_EQ(iou(a), iou(b));
    if (miou(a)) EXPECT_DOUBLE_EQ(*miou(a), *miou(b));
    EXPECT_GE(iou(a), 0.0);
    EXPECT_LE(iou(a), 1.0);
    if (miou(a)) {
      EXPECT_GE(*miou(a), 0.0);
      EXPECT_LE(*miou(a), 1.0);
    }
  }
}

TEST(Metrics, AddingCorrectVoxelsNeverLowersIou) {
  util::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    VoxelGrid p = random_grid(rng, cube4(), 0.3, {17});
    const VoxelGrid g = random_grid(rng, cube4(), 0.5, {17});
    double last = iou(confusion(p, g));
    for (std::size_t i : g.occupied_indices()) {
      p.set(i, 17);
      const double now = iou(confusion(p, g));
      EXPECT_GE(now, last - 1e-15);
      last = now;
    }
    EXPECT_GE(last, 0.0);
  }
}

TEST(Metrics, FixedModeScoresAbsentClassesZero) {
  VoxelGrid g(cube4());
  g.set(0, 17);
  const ConfusionCounts c = confusion(g, g);
  EXPECT_DOUBLE_EQ(*miou(c, MiouMode::Present), 1.0);
  EXPECT_DOUBLE_EQ(*miou(c, MiouMode::Fixed), 1.0 / 15.0);
}

TEST(Metrics, MicroAverageEqualsConcatenation) {
  util::Rng rng(5);
  GridSpec tall = cube4();
  tall.dims = {4, 4, 8};
  for (int trial = 0; trial < 50; ++trial) {
    const VoxelGrid p1 = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    const VoxelGrid g1 = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    const VoxelGrid p2 = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    const VoxelGrid g2 = random_grid(rng, cube4(), rng.uniform01(), {9, 17, 28});
    VoxelGrid pc(tall), gc(tall);
    for (std::size_t i = 0; i < 64; ++i) {
      if (p1.occupied[i]) pc.set(i, p1.label[i]);
      if (g1.occupied[i]) gc.set(i, g1.label[i]);
      if (p2.occupied[i]) pc.set(64 + i, p2.label[i]);
      if (g2.occupied[i]) gc.set(64 + i, g2.label[i]);
    }
    ConfusionCounts sum = confusion(p1, g1);
    sum += confusion(p2, g2);
    const ConfusionCounts whole = confusion(pc, gc);
    EXPECT_EQ(sum, whole);
    EXPECT_DOUBLE_EQ(iou(sum), iou(whole));
    EXPECT_EQ(miou(sum), miou(whole));
  }
}

TEST(Run, PredictionEqualsGroundTruth) {
  testsupport::TempDir tmp;
  util::Rng rng(6);
  for (const char* s : {"s1", "s2", "s3"}) put(tmp / "gt", "scene-0000", s, random_grid(rng, cube4(), 0.3, {17, 28}));
  const EvalReport r = evaluate_run(tmp / "gt", tmp / "gt");
  EXPECT_EQ(r.keyframes.size(), 3u);
  EXPECT_DOUBLE_EQ(r.sc_iou, 1.0);
  EXPECT_DOUBLE_EQ(*r.ssc_miou, 1.0);
  EXPECT_TRUE(r.missing.empty());
}

TEST(Run, MissingAndMalformedListed) {
  testsupport::TempDir tmp;
  util::Rng rng(7);
  std::vector<VoxelGrid> gts, preds;
  for (int i = 0; i < 3; ++i) {
    gts.push_back(random_grid(rng, cube4(), 0.3, {17, 28}));
    preds.push_back(random_grid(rng, cube4(), 0.3, {17, 28}));
    put(tmp / "gt", "scene-0000", "s" + std::to_string(i), gts.back());
  }
  put(tmp / "pred", "scene-0000", "s0", preds[0]);
  put(tmp / "pred", "scene-0000", "s1", preds[1]);
  put(tmp / "pred", "scene-0001", "extra", preds[1]);
  const EvalReport r = evaluate_run(tmp / "gt", tmp / "pred");
  ASSERT_EQ(r.missing.size(), 1u);
  EXPECT_EQ(r.missing[0], "scene-0000/s2");
  EXPECT_EQ(r.unexpected.size(), 1u);
  ConfusionCounts expect = confusion(preds[0], gts[0]);
  expect += confusion(preds[1], gts[1]);
  EXPECT_EQ(r.total, expect);
  EXPECT_DOUBLE_EQ(r.sc_iou, iou(expect));

  std::ofstream(tmp / "pred" / grid_relpath("scene-0000", "s1"), std::ios::binary | std::ios::trunc) << "junk";
  const EvalReport m = evaluate_run(tmp / "gt", tmp / "pred");
  ASSERT_EQ(m.malformed.size(), 1u);
  EXPECT_NE(m.malformed[0].find("scene-0000/s1"), std::string::npos);
  EXPECT_EQ(m.keyframes.size(), 1u);
}

TEST(Run, ReportsParse) {
  testsupport::TempDir tmp;
  util::Rng rng(8);
  put(tmp / "gt", "scene-0000", "a", random_grid(rng, cube4(), 0.3, {17, 28}));
  put(tmp / "pred", "scene-0000", "a", random_grid(rng, cube4(), 0.3, {17, 28}));
  const EvalReport r = evaluate_run(tmp / "gt", tmp / "pred");
  write_report(r, tmp / "out");
  std::ifstream in(tmp / "out" / "report.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_DOUBLE_EQ(j["aggregate"]["sc_iou"].get<double>(), r.sc_iou);
  EXPECT_TRUE(fs::exists(tmp / "out" / "report.txt"));
  EXPECT_FALSE(r.to_text().empty());
}
