#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "parkocc/dataset/sensors.hpp"
#include "parkocc/eval/metrics.hpp"
#include "parkocc/occ/gt.hpp"
#include "parkocc/sim/scene.hpp"

namespace parkocc::app {

using geom::Vec3;

/// Everything a run needs, read from one YAML file. Scene duration and step
/// follow the collection settings; per-scene seeds derive from `seed`.
struct RunConfig {
  std::filesystem::path output = "parkocc-run";
  std::uint64_t seed = 1;
  int jobs = 0;  // 0: all hardware threads
  dataset::CollectConfig collect{};
  sim::SceneConfig scene{};
  occ::GtConfig gt = occ::GtConfig::for_grid(occ::GridSpec{});
  eval::MiouMode miou_mode = eval::MiouMode::Present;

  void validate() const;

  /// Scene config of scene i with its derived seed and timing.
  sim::SceneConfig scene_config(int scene_index) const;

  std::filesystem::path dataset_dir() const { return output / "dataset"; }
  std::filesystem::path gt_dir() const { return output / "gts"; }
  std::filesystem::path baseline_dir() const { return output / "baseline"; }
  std::filesystem::path eval_dir() const { return output / "eval"; }
};

/// Throws ConfigError naming the offending key on unknown keys or bad values.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& yaml_text);

/// YAML text that parses back to `cfg`.
std::string dump_run_config(const RunConfig& cfg);

/// splitmix64 of (seed, index): independent per-scene seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace parkocc::app
