#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace parkocc::dataset {

using Json = nlohmann::ordered_json;

/// The nuScenes relational tables plus the lidarseg index, one JSON array per table.
inline constexpr std::array<std::string_view, 14> kTableNames = {
    "attribute", "calibrated_sensor", "category", "ego_pose",          "instance",
    "lidarseg",  "log",               "map",      "sample",            "sample_annotation",
    "sample_data", "scene",           "sensor",   "visibility"};

inline constexpr std::string_view kVersionDir = "v1.0-trainval";

class RelationalDB {
 public:
  RelationalDB();

  Json& table(std::string_view name);
  const Json& table(std::string_view name) const;
  bool has_table(std::string_view name) const { return tables_.count(std::string(name)) > 0; }

  void add(std::string_view table_name, Json row);

  /// Row with the given token, or nullptr.
  const Json* find(std::string_view table_name, std::string_view token) const;

  /// Writes <root>/v1.0-trainval/<table>.json for every table.
  void save(const std::filesystem::path& root) const;

  /// Reads every table file present; names of absent or unparsable tables go
  /// to `problems` when given, otherwise an IoError is thrown.
  static RelationalDB load(const std::filesystem::path& root,
                           std::vector<std::string>* problems = nullptr);

 private:
  std::map<std::string, Json> tables_;
  mutable std::map<std::string, std::unordered_map<std::string, std::size_t>> index_;
};

}  // namespace parkocc::dataset
