#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "parkocc/dataset/db.hpp"
#include "parkocc/dataset/manifest.hpp"
#include "parkocc/dataset/pointio.hpp"
#include "parkocc/sim/lidar.hpp"

namespace parkocc::dataset {

/// Called at the start of every frame.
using CollectProgress = std::function<void(const std::string& scene_name, int frame, int frames)>;

/// "scene-0003".
std::string scene_name(int scene_index);

/// Point records and nuScenes labels for one scan.
std::vector<PointRecord> to_records(const sim::SemanticScan& scan);
std::vector<std::uint8_t> to_labels(const sim::SemanticScan& scan);

/// Writes a nuScenes-style tree: maps/, samples/, sweeps/, v1.0-trainval/,
/// lidarseg/ and manifest.json. Scenes are collected frame by frame; tables
/// and the manifest are written by finish().
class DatasetWriter {
 public:
  /// Creates the directory layout. A non-empty root is an error unless
  /// `overwrite`, in which case it is cleared first.
  DatasetWriter(std::filesystem::path root, CollectConfig cfg, bool overwrite = false);

  /// Simulates and stores every frame of one scene; returns the scene token.
  std::string add_scene(const sim::SceneModel& scene, const std::string& name,
                        const CollectProgress& progress = {});

  void finish();

  const RelationalDB& db() const { return db_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  void add_static_tables();
  void write_map(const sim::SceneModel& scene, const std::string& name, const std::string& log_token);

  std::filesystem::path root_;
  CollectConfig cfg_;
  RelationalDB db_;
  Manifest manifest_;
};

/// One-scene convenience wrapper around DatasetWriter.
RelationalDB collect_run(const sim::SceneModel& scene, const CollectConfig& cfg,
                         const std::filesystem::path& out_dir, bool overwrite = false);

}  // namespace parkocc::dataset
