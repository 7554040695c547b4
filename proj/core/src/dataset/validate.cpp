#include "parkocc/dataset/validate.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "parkocc/dataset/db.hpp"
#include "parkocc/dataset/manifest.hpp"
#include "parkocc/dataset/pointio.hpp"
#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/dataset/token.hpp"
#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace fs = std::filesystem;

namespace {

struct ForeignKey {
  const char* table;
  const char* field;
  const char* target;
  bool nullable;  // "" allowed
};

constexpr ForeignKey kForeignKeys[] = {
    {"calibrated_sensor", "sensor_token", "sensor", false},
    {"scene", "log_token", "log", false},
    {"scene", "first_sample_token", "sample", false},
    {"scene", "last_sample_token", "sample", false},
    {"sample", "scene_token", "scene", false},
    {"sample", "prev", "sample", true},
    {"sample", "next", "sample", true},
    {"sample_data", "sample_token", "sample", false},
    {"sample_data", "ego_pose_token", "ego_pose", false},
    {"sample_data", "calibrated_sensor_token", "calibrated_sensor", false},
    {"sample_data", "prev", "sample_data", true},
    {"sample_data", "next", "sample_data", true},
    {"sample_annotation", "sample_token", "sample", false},
    {"sample_annotation", "instance_token", "instance", false},
    {"sample_annotation", "visibility_token", "visibility", false},
    {"sample_annotation", "prev", "sample_annotation", true},
    {"sample_annotation", "next", "sample_annotation", true},
    {"instance", "category_token", "category", false},
    {"instance", "first_annotation_token", "sample_annotation", false},
    {"instance", "last_annotation_token", "sample_annotation", false},
    {"lidarseg", "sample_data_token", "sample_data", false},
};

std::string str_field(const Json& row, const char* key) {
  if (!row.is_object() || !row.contains(key) || !row[key].is_string()) return {};
  return row[key].get<std::string>();
}

std::string row_token(const Json& row) { return str_field(row, "token"); }

class Checker {
 public:
  explicit Checker(const fs::path& root) : root_(root) {}

  ValidationReport run() {
    std::vector<std::string> problems;
    db_ = RelationalDB::load(root_, &problems);
    for (const auto& p : problems) add("missing table", std::string(kVersionDir), p);
    try {
      manifest_ = Manifest::load(root_);
      have_manifest_ = true;
    } catch (const Error& e) {
      add("missing manifest", "manifest.json", e.what());
    }
    check_tokens();
    check_foreign_keys();
    check_sample_lists();
    check_payloads();
    check_quaternions();
    check_keyframes();
    report_.digest = tree_digest(root_);
    return std::move(report_);
  }

 private:
  void add(std::string code, std::string where, std::string message) {
    report_.findings.push_back({std::move(code), std::move(where), std::move(message)});
  }

  void check_tokens() {
    for (auto name : kTableNames) {
      std::set<std::string> seen;
      for (const auto& row : db_.table(name)) {
        ++report_.rows_checked;
        const std::string tok = row_token(row);
        const bool ok = name == "visibility" ? (tok.size() == 1 && tok[0] >= '1' && tok[0] <= '4')
                                             : is_valid_token(tok);
        if (!ok) add("malformed token", std::string(name), "token '" + tok + "'");
        if (!seen.insert(tok).second) add("duplicate token", std::string(name) + "/" + tok, "token repeated");
      }
    }
  }

  void check_ref(const char* table, const std::string& tok, const std::string& ref, const char* target,
                 bool nullable, const char* field) {
    if (ref.empty() && nullable) return;
    if (!db_.find(target, ref)) {
      add("dangling foreign key", std::string(table) + "/" + tok,
          std::string(field) + " -> " + target + " '" + ref + "' does not resolve");
    }
  }

  void check_foreign_keys() {
    for (const auto& fk : kForeignKeys) {
      for (const auto& row : db_.table(fk.table)) {
        check_ref(fk.table, row_token(row), str_field(row, fk.field), fk.target, fk.nullable, fk.field);
      }
    }
    for (const auto& row : db_.table("map")) {
      if (!row.contains("log_tokens") || !row["log_tokens"].is_array()) {
        add("dangling foreign key", "map/" + row_token(row), "log_tokens missing");
        continue;
      }
      for (const auto& l : row["log_tokens"]) {
        check_ref("map", row_token(row), l.is_string() ? l.get<std::string>() : "", "log", false, "log_tokens");
      }
    }
    for (const auto& row : db_.table("sample_annotation")) {
      if (!row.contains("attribute_tokens") || !row["attribute_tokens"].is_array()) continue;
      for (const auto& a : row["attribute_tokens"]) {
        check_ref("sample_annotation", row_token(row), a.is_string() ? a.get<std::string>() : "",
                  "attribute", false, "attribute_tokens");
      }
    }
  }

  void check_sample_lists() {
    std::map<std::string, std::vector<const Json*>> by_scene;
    for (const auto& row : db_.table("sample")) by_scene[str_field(row, "scene_token")].push_back(&row);
    for (const auto& scene : db_.table("scene")) {
      const std::string st = row_token(scene);
      const auto& rows = by_scene[st];
      int heads = 0, tails = 0;
      for (const Json* r : rows) {
        heads += str_field(*r, "prev").empty();
        tails += str_field(*r, "next").empty();
        const std::string next = str_field(*r, "next");
        if (!next.empty()) {
          const Json* n = db_.find("sample", next);
          if (n && str_field(*n, "prev") != row_token(*r)) {
            add("broken sample list", "sample/" + row_token(*r), "next.prev does not point back");
          }
          if (n && str_field(*n, "scene_token") != st) {
            add("broken sample list", "sample/" + row_token(*r), "next sample belongs to another scene");
          }
        }
      }
      if (heads != 1 || tails != 1) {
        add("broken sample list", "scene/" + st,
            std::to_string(heads) + " heads and " + std::to_string(tails) + " tails");
        continue;
      }
      std::set<std::string> visited;
      std::string cur = str_field(scene, "first_sample_token");
      while (!cur.empty() && visited.insert(cur).second) {
        const Json* r = db_.find("sample", cur);
        if (!r) break;
        if (str_field(*r, "next").empty() && cur != str_field(scene, "last_sample_token")) {
          add("broken sample list", "scene/" + st, "last_sample_token is not the list tail");
        }
        cur = str_field(*r, "next");
      }
      if (visited.size() != rows.size()) {
        add("broken sample list", "scene/" + st,
            "walk from first sample visits " + std::to_string(visited.size()) + " of " +
                std::to_string(rows.size()) + " samples");
      }
      if (scene.contains("nbr_samples") && scene["nbr_samples"].is_number_integer() &&
          scene["nbr_samples"].get<std::size_t>() != rows.size()) {
        add("broken sample list", "scene/" + st, "nbr_samples disagrees with sample rows");
      }
    }
  }

  void check_payloads() {
    std::map<std::string, const Json*> seg_by_sd;
    for (const auto& row : db_.table("lidarseg")) seg_by_sd[str_field(row, "sample_data_token")] = &row;
    const auto tags = nuscenes_tag_set();
    for (const auto& row : db_.table("sample_data")) {
      const std::string tok = row_token(row);
      const std::string file = str_field(row, "filename");
      const fs::path p = root_ / file;
      std::error_code ec;
      if (file.empty() || !fs::is_regular_file(p, ec)) {
        add("missing data file", "sample_data/" + tok, "'" + file + "' not found");
        continue;
      }
      ++report_.files_checked;
      const auto size = fs::file_size(p, ec);
      if (size % kPointRecordBytes != 0) {
        add("truncated point file", file, std::to_string(size) + " bytes");
        continue;
      }
      const std::size_t n = size / kPointRecordBytes;
      if (!row.contains("num_points") || !row["num_points"].is_number_integer() ||
          row["num_points"].get<std::size_t>() != n) {
        add("point count mismatch", "sample_data/" + tok, "num_points does not match " + file);
      }
      const bool key = row.contains("is_key_frame") && row["is_key_frame"].is_boolean() &&
                       row["is_key_frame"].get<bool>();
      const auto seg = seg_by_sd.find(tok);
      if (!key) {
        if (seg != seg_by_sd.end()) add("unexpected label file", "sample_data/" + tok, "sweep has lidarseg");
        continue;
      }
      if (seg == seg_by_sd.end()) {
        add("missing companion label file", "sample_data/" + tok, "no lidarseg row");
        continue;
      }
      const std::string seg_file = str_field(*seg->second, "filename");
      if (seg_file.empty() || !fs::is_regular_file(root_ / seg_file, ec)) {
        add("missing companion label file", "sample_data/" + tok, "'" + seg_file + "' not found");
        continue;
      }
      ++report_.files_checked;
      const auto labels = read_lidarseg(root_ / seg_file);
      if (labels.size() != n) {
        add("label count mismatch", seg_file,
            std::to_string(labels.size()) + " labels for " + std::to_string(n) + " points");
      }
      for (std::uint8_t l : labels) {
        if (std::find(tags.begin(), tags.end(), l) == tags.end()) {
          add("label outside tag set", seg_file, "label " + std::to_string(l));
          break;
        }
      }
    }
  }

  void check_quaternions() {
    for (const char* table : {"calibrated_sensor", "ego_pose", "sample_annotation"}) {
      for (const auto& row : db_.table(table)) {
        bool ok = row.contains("rotation") && row["rotation"].is_array() && row["rotation"].size() == 4;
        if (ok) {
          double n2 = 0;
          for (const auto& v : row["rotation"]) {
            if (!v.is_number()) ok = false;
            else n2 += v.get<double>() * v.get<double>();
          }
          ok = ok && std::abs(std::sqrt(n2) - 1.0) <= 1e-6;
        }
        if (!ok) add("quaternion not unit", std::string(table) + "/" + row_token(row), "|q| != 1");
      }
    }
  }

  void check_keyframes() {
    if (!have_manifest_) return;
    int ratio = 0;
    try {
      ratio = manifest_.collect.keyframe_ratio();
    } catch (const Error& e) {
      add("invalid manifest", "manifest.json", e.what());
      return;
    }
    const double dt_us = manifest_.collect.fixed_dt * 1e6;
    for (const auto& row : db_.table("sample_data")) {
      if (!row.contains("timestamp") || !row["timestamp"].is_number()) {
        add("keyframe flag mismatch", "sample_data/" + row_token(row), "no timestamp");
        continue;
      }
      const double ts = row["timestamp"].get<double>();
      const long long frame = std::llround(ts / dt_us);
      const bool expect = (frame + 1) % ratio == 0;
      const bool key = row.contains("is_key_frame") && row["is_key_frame"].is_boolean() &&
                       row["is_key_frame"].get<bool>();
      if (key != expect) {
        add("keyframe flag mismatch", "sample_data/" + row_token(row),
            "frame " + std::to_string(frame) + " flagged " + (key ? "key" : "sweep"));
      }
    }
  }

  fs::path root_;
  RelationalDB db_;
  Manifest manifest_;
  bool have_manifest_ = false;
  ValidationReport report_;
};

struct CtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};

}  // namespace

std::string tree_digest(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root));
  }
  std::sort(files.begin(), files.end());
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  EVP_DigestInit_ex(ctx.get(), EVP_md5(), nullptr);
  for (const auto& f : files) {
    const std::string name = f.generic_string();
    EVP_DigestUpdate(ctx.get(), name.data(), name.size() + 1);
    const auto bytes = read_file_bytes(root / f);
    const std::uint64_t n = bytes.size();
    EVP_DigestUpdate(ctx.get(), &n, sizeof n);
    EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size());
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kDigits[md[i] >> 4];
    out += kDigits[md[i] & 0xF];
  }
  return out;
}

ValidationReport validate_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("dataset root " + root.string() + " is not a directory");
  return Checker(root).run();
}

}  // namespace parkocc::dataset
