#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "parkocc/dataset/db.hpp"
#include "parkocc/dataset/sensors.hpp"
#include "parkocc/sim/scene.hpp"

namespace parkocc::dataset {

inline constexpr int kLayoutVersion = 1;

Json to_json(const sim::SceneConfig& c);
sim::SceneConfig scene_config_from_json(const Json& j);

Json to_json(const sim::LidarSpec& s);
sim::LidarSpec lidar_spec_from_json(const Json& j);

Json to_json(const CollectConfig& c);
CollectConfig collect_config_from_json(const Json& j);

struct ManifestScene {
  std::string name;
  std::string token;
  std::optional<sim::SceneConfig> config;  // absent for hand-built scenes
};

/// manifest.json at the dataset root: enough to rebuild every scene.
struct Manifest {
  CollectConfig collect;
  std::vector<ManifestScene> scenes;

  Json to_json() const;
  static Manifest from_json(const Json& j);
  static Manifest load(const std::filesystem::path& root);
  void save(const std::filesystem::path& root) const;
};

}  // namespace parkocc::dataset
