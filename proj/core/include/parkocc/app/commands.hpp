#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parkocc/app/config.hpp"
#include "parkocc/dataset/db.hpp"
#include "parkocc/dataset/validate.hpp"
#include "parkocc/stitch/cloud.hpp"

namespace parkocc::app {

/// Builds every scene of the config and writes the dataset. Prints one line
/// per frame to `log` when given. Returns the validation report of the result.
dataset::ValidationReport run_synth(const RunConfig& cfg, const std::filesystem::path& dataset_dir,
                                    bool overwrite, std::ostream* log = nullptr);

/// One scene read back from a dataset, with box poses from the rebuilt scene.
struct SceneSequence {
  std::string name;
  sim::SceneModel scene;
  std::vector<double> times;                 // per frame, seconds
  std::vector<std::size_t> key_frames;       // indices into the frames
  std::vector<std::string> key_samples;      // sample token per key frame
  std::vector<stitch::LabeledCloud> key_scans;  // labeled, sensor frame
  std::vector<stitch::KeyPose> key_poses;
  stitch::AggregatedScene aggregated;
};

/// Reads one scene and aggregates all of its frames. Sweep points carry
/// kUnlabeled. Throws when the scene has no stored config.
SceneSequence load_sequence(const std::filesystem::path& dataset_dir, const dataset::RelationalDB& db,
                            const std::string& scene_name, const RunConfig& cfg);

struct GtOptions {
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir;
  std::filesystem::path baseline_dir;  // empty: no baseline predictions
  bool overwrite = false;
  bool oracle = true;  // compare against the analytic scene
};

struct KeyframeGtRecord {
  std::string scene;
  std::string sample;
  bool ok = false;
  std::string error;
  std::size_t gt_occupied = 0;
  std::size_t sparse_occupied = 0;
  std::size_t baseline_occupied = 0;
  // Against the analytic scene over voxels crossed by key-frame rays.
  std::size_t observed = 0;
  double oracle_iou = 0.0;
  double label_accuracy = 0.0;
};

struct GtRunReport {
  std::vector<KeyframeGtRecord> keyframes;
  std::size_t failures() const;
};

/// Observed-voxel comparison of a GT grid with the analytic grid.
void compare_with_oracle(const occ::VoxelGrid& gt, const occ::VoxelGrid& oracle,
                         const std::vector<std::uint8_t>& observed, KeyframeGtRecord& rec);

/// Per keyframe GT (and optional baseline) grids; stage failures are
/// recorded per keyframe and the run continues.
GtRunReport run_gt(const RunConfig& cfg, const GtOptions& opts, std::ostream* log = nullptr);

struct EvalOptions {
  std::filesystem::path gt_dir;
  std::filesystem::path pred_dir;
  std::filesystem::path out_dir;
};

eval::EvalReport run_eval(const RunConfig& cfg, const EvalOptions& opts);

/// .occ grid -> colored voxel centers; .pcd.bin point file -> points, colored
/// from a companion label file when given.
void run_export(const std::filesystem::path& input, const std::filesystem::path& output,
                const std::filesystem::path& labels = {});

}  // namespace parkocc::app
