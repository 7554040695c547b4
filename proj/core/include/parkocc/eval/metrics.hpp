#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parkocc/occ/grid.hpp"

namespace parkocc::eval {

struct Counts {
  std::uint64_t tp = 0, fp = 0, fn = 0;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

/// Binary (occupancy) counts plus per-class counts indexed by tag.
struct ConfusionCounts {
  Counts binary;
  std::array<Counts, 256> per_class{};

  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;

  /// Tags with any nonzero count, ascending.
  std::vector<std::uint8_t> present_classes() const;
};

/// Occupied-but-mislabeled voxels count as FP for the predicted class and FN
/// for the true class. Throws when the specs differ.
ConfusionCounts confusion(const occ::VoxelGrid& pred, const occ::VoxelGrid& gt);

/// TP / (TP + FP + FN); 1.0 when all three are zero.
double iou(const Counts& c);
double iou(const ConfusionCounts& c);

enum class MiouMode {
  Present,  // classes occurring in prediction or ground truth
  Fixed,    // every tag of the label set; absent classes score 0
};

/// Mean per-class IoU; nullopt when no class qualifies.
std::optional<double> miou(const ConfusionCounts& c, MiouMode mode = MiouMode::Present);

struct KeyframeResult {
  std::string scene;
  std::string sample;
  ConfusionCounts counts;
  double sc_iou = 0.0;
  std::optional<double> ssc_miou;
};

struct EvalReport {
  std::vector<KeyframeResult> keyframes;
  ConfusionCounts total;
  double sc_iou = 0.0;
  std::optional<double> ssc_miou;
  MiouMode mode = MiouMode::Present;
  std::vector<std::string> missing;    // "scene/sample" without a prediction
  std::vector<std::string> malformed;  // "scene/sample: reason"
  std::vector<std::string> unexpected; // predictions with no ground truth

  std::string to_json() const;
  std::string to_text() const;
};

/// Relative path of a keyframe grid below a gt or prediction directory.
std::filesystem::path grid_relpath(const std::string& scene, const std::string& sample);

/// Keyframe grids found below `dir` as (scene, sample) pairs, sorted.
std::vector<std::pair<std::string, std::string>> list_grids(const std::filesystem::path& dir);

/// Compares every ground-truth grid with its prediction and micro-averages
/// over the keyframes that have both.
EvalReport evaluate_run(const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir,
                        MiouMode mode = MiouMode::Present, int jobs = 1);

void write_report(const EvalReport& r, const std::filesystem::path& out_dir);

}  // namespace parkocc::eval
