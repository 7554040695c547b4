#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <set>

#include "md5_ref.hpp"
#include "parkocc/dataset/pointio.hpp"
#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/dataset/token.hpp"
#include "parkocc/dataset/validate.hpp"
#include "parkocc/dataset/writer.hpp"
#include "parkocc/error.hpp"
#include "parkocc/util/rng.hpp"
#include "tempdir.hpp"

using namespace parkocc;
using namespace parkocc::dataset;
namespace fs = std::filesystem;
using testsupport::TempDir;

namespace {

CollectConfig small_collect(int frames = 50, double interval = 0.5) {
  CollectConfig c;
  c.scene_count = 1;
  c.frames_per_scene = frames;
  c.fixed_dt = 0.1;
  c.keyframe_interval = interval;
  c.sensors.lidar.channels = 8;
  c.sensors.lidar.azimuth_steps = 120;
  return c;
}

sim::SceneModel small_scene(std::uint64_t seed = 3) {
  sim::SceneConfig s;
  s.seed = seed;
  s.scene_duration = 10.0;
  return sim::build_parking_lot(s);
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file();
  return n;
}

bool has_finding(const ValidationReport& r, const std::string& code) {
  for (const auto& f : r.findings) {
    if (f.code == code) return true;
  }
  return false;
}

float read_f32_le(const std::vector<unsigned char>& b, std::size_t off) {
  const std::uint32_t u = b[off] | b[off + 1] << 8 | b[off + 2] << 16 |
                          static_cast<std::uint32_t>(b[off + 3]) << 24;
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

std::vector<unsigned char> raw_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Token, Rfc1321Vectors) {
  EXPECT_EQ(generate_token("", ""), "d41d8cd98f00b204e9800998ecf8427e");
  EXPECT_EQ(generate_token("a", "bc"), "900150983cd24fb0d6963f7d28e17f72");
  EXPECT_EQ(md5_hex("message digest"), "f96b697d7cb7938d525a2f31aaf161d0");
}

TEST(Token, MatchesReferenceDigest) {
  util::Rng rng(1);
  for (int i = 0; i < 300; ++i) {
    std::string key, data;
    for (std::uint64_t n = rng.below(150); n > 0; --n) key += static_cast<char>(rng.below(256));
    for (std::uint64_t n = rng.below(150); n > 0; --n) data += static_cast<char>(rng.below(256));
    EXPECT_EQ(generate_token(key, data), testsupport::md5_reference(key + data));
  }
  EXPECT_EQ(testsupport::md5_reference("abc"), "900150983cd24fb0d6963f7d28e17f72");
}

TEST(Token, DeterministicAndWellFormed) {
  EXPECT_EQ(generate_token("scene", "x"), generate_token("scene", "x"));
  EXPECT_TRUE(is_valid_token(generate_token("scene", "x")));
  EXPECT_FALSE(is_valid_token("d41d8cd98f00b204e9800998ecf8427"));
  EXPECT_FALSE(is_valid_token("D41D8CD98F00B204E9800998ECF8427E"));
  EXPECT_FALSE(is_valid_token("g41d8cd98f00b204e9800998ecf8427e"));
}

TEST(TagMap, TableRows) {
  EXPECT_EQ(map_semantic_tag(14).nuscenes_tag, 17);
  EXPECT_EQ(map_semantic_tag(14).category_name, "vehicle.car");
  EXPECT_EQ(map_semantic_tag(0).nuscenes_tag, 0);
  EXPECT_EQ(map_semantic_tag(0).category_name, "noise");
  EXPECT_EQ(map_semantic_tag(4).nuscenes_tag, 28);
  EXPECT_EQ(map_semantic_tag(4).category_name, "static.mamade");
  EXPECT_THROW(map_semantic_tag(31), ConfigError);
  EXPECT_THROW(map_semantic_tag(-1), ConfigError);
}

TEST(TagMap, ImageIsFifteenTags) {
  const std::set<int> expect = {0, 2, 9, 14, 15, 16, 17, 21, 23, 24, 26, 27, 28, 29, 30};
  std::set<int> image;
  for (int t = 0; t <= 30; ++t) image.insert(map_semantic_tag(t).nuscenes_tag);
  EXPECT_EQ(image, expect);
  const auto set = nuscenes_tag_set();
  EXPECT_EQ(std::set<int>(set.begin(), set.end()), expect);
}

TEST(Keyframe, Rule) {
  CollectConfig c;
  c.keyframe_interval = 0.5;
  c.fixed_dt = 0.1;
  EXPECT_TRUE(is_keyframe(4, c));
  EXPECT_FALSE(is_keyframe(5, c));
  c.fixed_dt = 0.05;
  std::vector<int> keys;
  for (int i = 0; i < 40; ++i) {
    if (is_keyframe(i, c)) keys.push_back(i);
  }
  EXPECT_EQ(keys, (std::vector<int>{9, 19, 29, 39}));
  c.fixed_dt = 0.3;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Keyframe, Timestamps) {
  EXPECT_EQ(frame_timestamp_us(0, 0.1), 0);
  EXPECT_EQ(frame_timestamp_us(37, 0.1), 3700000);
}

TEST(Sensors, PinholeFocal) {
  CameraSpec c;
  c.width = 1600;
  c.fov = 70;
  EXPECT_NEAR(c.focal_length(), 1142.51, 0.01);
  const SensorSuite s = SensorSuite::defaults();
  EXPECT_EQ(s.cameras.size(), 6u);
  EXPECT_EQ(s.radars.size(), 5u);
  EXPECT_FALSE(s.duplicate_positions().empty());
}

TEST(PointIo, Layout) {
  TempDir tmp;
  const PointRecord p{1, 2, 3, 255, 5};
  write_point_bin(std::span(&p, 1), tmp / "one.bin");
  const auto bytes = raw_bytes(tmp / "one.bin");
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(read_f32_le(bytes, 0), 1.0f);
  EXPECT_EQ(read_f32_le(bytes, 4), 2.0f);
  EXPECT_EQ(read_f32_le(bytes, 8), 3.0f);
  EXPECT_EQ(read_f32_le(bytes, 12), 255.0f);
  EXPECT_EQ(read_f32_le(bytes, 16), 5.0f);
}

TEST(PointIo, RoundTripBitIdentical) {
  TempDir tmp;
  util::Rng rng(2);
  std::vector<PointRecord> pts(1000);
  for (auto& p : pts) {
    p = {static_cast<float>(rng.uniform(-80, 80)), static_cast<float>(rng.uniform(-80, 80)),
         static_cast<float>(rng.uniform(-5, 5)), static_cast<float>(rng.uniform(0, 255)),
         static_cast<float>(rng.below(64))};
  }
  write_point_bin(pts, tmp / "pts.bin");
  const auto back = read_point_bin(tmp / "pts.bin");
  ASSERT_EQ(back.size(), pts.size());
  EXPECT_EQ(std::memcmp(back.data(), pts.data(), pts.size() * sizeof(PointRecord)), 0);
}

TEST(PointIo, TruncatedFileFails) {
  TempDir tmp;
  std::vector<char> bytes(45, 0);
  write_file_bytes(tmp / "bad.bin", bytes);
  EXPECT_THROW(read_point_bin(tmp / "bad.bin"), IoError);
  EXPECT_THROW(read_point_bin(tmp / "missing.bin"), IoError);
}

TEST(PointIo, LidarsegLayout) {
  TempDir tmp;
  const std::vector<std::uint8_t> labels = {17, 28, 24};
  write_lidarseg(labels, tmp / "seg.bin");
  EXPECT_EQ(raw_bytes(tmp / "seg.bin"), (std::vector<unsigned char>{0x11, 0x1C, 0x18}));
  EXPECT_EQ(read_lidarseg(tmp / "seg.bin"), labels);
}

class Collected : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir("parkocc-collect");
    collect_run(small_scene(), small_collect(), tmp_->path() / "a");
  }
  static void TearDownTestSuite() {
    delete tmp_;
    tmp_ = nullptr;
  }
  static fs::path root() { return tmp_->path() / "a"; }
  static fs::path copy(const std::string& name) {
    const fs::path dst = tmp_->path() / name;
    fs::remove_all(dst);
    fs::copy(root(), dst, fs::copy_options::recursive);
    return dst;
  }
  static TempDir* tmp_;
};
TempDir* Collected::tmp_ = nullptr;

TEST_F(Collected, LayoutCounts) {
  for (const char* d : {"maps", "samples", "sweeps", "v1.0-trainval", "lidarseg"}) {
    EXPECT_TRUE(fs::is_directory(root() / d)) << d;
  }
  EXPECT_TRUE(fs::exists(root() / "manifest.json"));
  EXPECT_EQ(count_files(root() / "samples" / "LIDAR_TOP"), 10u);
  EXPECT_EQ(count_files(root() / "sweeps" / "LIDAR_TOP"), 40u);
  const RelationalDB db = RelationalDB::load(root());
  EXPECT_EQ(db.table("sample").size(), 10u);
  EXPECT_EQ(db.table("visibility").size(), 4u);
}

TEST_F(Collected, ValidatorClean) {
  const ValidationReport r = validate_dataset(root());
  for (const auto& f : r.findings) ADD_FAILURE() << f.code << " " << f.where << " " << f.message;
  EXPECT_TRUE(r.ok());
  EXPECT_GT(r.rows_checked, 0u);
}

TEST_F(Collected, TokensDistinct) {
  const RelationalDB db = RelationalDB::load(root());
  std::set<std::string> all;
  std::size_t n = 0;
  for (auto name : kTableNames) {
    for (const auto& row : db.table(name)) {
      ++n;
      // Visibility rows are keyed by level "1".."4".
      if (name != "visibility") EXPECT_TRUE(is_valid_token(row["token"].get<std::string>()));
      all.insert(std::string(name) + row["token"].get<std::string>());
    }
  }
  EXPECT_EQ(all.size(), n);
}

TEST_F(Collected, PayloadParity) {
  const RelationalDB db = RelationalDB::load(root());
  std::map<std::string, std::string> seg;
  for (const auto& row : db.table("lidarseg")) {
    seg[row["sample_data_token"].get<std::string>()] = row["filename"].get<std::string>();
  }
  std::size_t lidar_rows = 0;
  for (const auto& row : db.table("sample_data")) {
    const std::string file = row["filename"].get<std::string>();
    if (file.find("LIDAR_TOP") == std::string::npos) continue;
    ++lidar_rows;
    const auto size = fs::file_size(root() / file);
    EXPECT_EQ(size % 20, 0u);
    EXPECT_EQ(size / 20, row["num_points"].get<std::size_t>());
    const bool key = row["is_key_frame"].get<bool>();
    EXPECT_EQ(key, file.rfind("samples/", 0) == 0);
    const auto it = seg.find(row["token"].get<std::string>());
    EXPECT_EQ(it != seg.end(), key);
    if (it != seg.end()) {
      const auto labels = read_lidarseg(root() / it->second);
      EXPECT_EQ(labels.size(), size / 20);
      for (auto l : labels) EXPECT_TRUE(is_nuscenes_tag(l));
    }
  }
  EXPECT_EQ(lidar_rows, 50u);
}

TEST_F(Collected, SampleListPerScene) {
  const RelationalDB db = RelationalDB::load(root());
  std::map<std::string, const Json*> by_token;
  int heads = 0, tails = 0;
  const Json* head = nullptr;
  for (const auto& row : db.table("sample")) {
    by_token[row["token"].get<std::string>()] = &row;
    if (row["prev"].get<std::string>().empty()) {
      ++heads;
      head = &row;
    }
    if (row["next"].get<std::string>().empty()) ++tails;
  }
  EXPECT_EQ(heads, 1);
  EXPECT_EQ(tails, 1);
  std::size_t visited = 0;
  long long last_ts = -1;
  for (const Json* r = head; r;) {
    ++visited;
    EXPECT_GT((*r)["timestamp"].get<long long>(), last_ts);
    last_ts = (*r)["timestamp"].get<long long>();
    const std::string next = (*r)["next"].get<std::string>();
    r = next.empty() ? nullptr : by_token.at(next);
  }
  EXPECT_EQ(visited, by_token.size());
}

TEST_F(Collected, MissingLabelFileReported) {
  const fs::path d = copy("no-seg");
  const RelationalDB db = RelationalDB::load(d);
  fs::remove(d / db.table("lidarseg")[0]["filename"].get<std::string>());
  EXPECT_TRUE(has_finding(validate_dataset(d), "missing companion label file"));
}

TEST_F(Collected, ShortTokenReported) {
  const fs::path d = copy("short-token");
  RelationalDB db = RelationalDB::load(d);
  std::string& tok = db.table("attribute")[0]["token"].get_ref<std::string&>();
  tok.pop_back();
  db.save(d);
  EXPECT_TRUE(has_finding(validate_dataset(d), "malformed token"));
}

TEST_F(Collected, DanglingKeyReported) {
  const fs::path d = copy("dangling");
  RelationalDB db = RelationalDB::load(d);
  db.table("sample")[0]["scene_token"] = generate_token("nowhere", "x");
  db.save(d);
  EXPECT_TRUE(has_finding(validate_dataset(d), "dangling foreign key"));
}

TEST_F(Collected, LabelCountMismatchReported) {
  const fs::path d = copy("parity");
  const RelationalDB db = RelationalDB::load(d);
  const std::string seg = db.table("lidarseg")[0]["filename"].get<std::string>();
  auto labels = read_lidarseg(d / seg);
  labels.pop_back();
  write_lidarseg(labels, d / seg);
  EXPECT_TRUE(has_finding(validate_dataset(d), "label count mismatch"));
}

TEST_F(Collected, ByteIdenticalRerun) {
  TempDir other;
  collect_run(small_scene(), small_collect(), other / "b");
  EXPECT_EQ(tree_digest(root()), tree_digest(other / "b"));
  collect_run(small_scene(4), small_collect(), other / "c");
  EXPECT_NE(tree_digest(root()), tree_digest(other / "c"));
}

TEST(Collect, NonEmptyOutputRequiresOverwrite) {
  TempDir tmp;
  collect_run(small_scene(), small_collect(10), tmp / "x");
  EXPECT_THROW(collect_run(small_scene(), small_collect(10), tmp / "x"), IoError);
  EXPECT_NO_THROW(collect_run(small_scene(), small_collect(10), tmp / "x", true));
}

TEST(Collect, ZeroKeyframesRejected) {
  TempDir tmp;
  EXPECT_THROW(collect_run(small_scene(), small_collect(4, 0.5), tmp / "x"), ConfigError);
}

TEST(Validate, CompanionParityAgainstBinSize) {
  // A 3-label file next to a 3-point and a 2-point bin.
  TempDir tmp;
  collect_run(small_scene(), small_collect(5), tmp / "d");
  RelationalDB db = RelationalDB::load(tmp / "d");
  const std::string sd_token = db.table("lidarseg")[0]["sample_data_token"].get<std::string>();
  const std::string seg = db.table("lidarseg")[0]["filename"].get<std::string>();
  std::string bin;
  for (auto& row : db.table("sample_data")) {
    if (row["token"] == sd_token) {
      bin = row["filename"].get<std::string>();
      row["num_points"] = 3;
    }
  }
  db.save(tmp / "d");
  const std::vector<PointRecord> three(3, PointRecord{1, 1, 1, 1, 1});
  write_point_bin(three, tmp / "d" / bin);
  write_lidarseg(std::vector<std::uint8_t>{17, 28, 24}, tmp / "d" / seg);
  EXPECT_TRUE(validate_dataset(tmp / "d").ok());

  write_point_bin(std::span(three.data(), 2), tmp / "d" / bin);
  EXPECT_FALSE(validate_dataset(tmp / "d").ok());
}
