#include "parkocc/eval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parkocc/dataset/tagmap.hpp"
#include "parkocc/error.hpp"
#include "parkocc/occ/io.hpp"
#include "parkocc/util/parallel.hpp"

namespace parkocc::eval {

namespace fs = std::filesystem;

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  binary += o.binary;
  for (std::size_t c = 0; c < per_class.size(); ++c) per_class[c] += o.per_class[c];
  return *this;
}

std::vector<std::uint8_t> ConfusionCounts::present_classes() const {
  std::vector<std::uint8_t> out;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const auto& k = per_class[c];
    if (k.tp + k.fp + k.fn > 0) out.push_back(static_cast<std::uint8_t>(c));
  }
  return out;
}

ConfusionCounts confusion(const occ::VoxelGrid& pred, const occ::VoxelGrid& gt) {
  if (!(pred.spec == gt.spec)) throw Error("evalkit", "prediction and ground truth grid specs differ");
  if (pred.occupied.size() != gt.occupied.size()) throw Error("evalkit", "grid sizes differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < gt.occupied.size(); ++i) {
    const bool p = pred.occupied[i] != 0, g = gt.occupied[i] != 0;
    if (p && g) {
      ++c.binary.tp;
      if (pred.label[i] == gt.label[i]) {
        ++c.per_class[gt.label[i]].tp;
      } else {
        ++c.per_class[pred.label[i]].fp;
        ++c.per_class[gt.label[i]].fn;
      }
    } else if (p) {
      ++c.binary.fp;
      ++c.per_class[pred.label[i]].fp;
    } else if (g) {
      ++c.binary.fn;
      ++c.per_class[gt.label[i]].fn;
    }
  }
  return c;
}

double iou(const Counts& c) {
  const std::uint64_t den = c.tp + c.fp + c.fn;
  return den == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double iou(const ConfusionCounts& c) { return iou(c.binary); }

std::optional<double> miou(const ConfusionCounts& c, MiouMode mode) {
  double sum = 0.0;
  std::size_t n = 0;
  if (mode == MiouMode::Present) {
    for (auto t : c.present_classes()) {
      sum += iou(c.per_class[t]);
      ++n;
    }
  } else {
    for (auto t : dataset::nuscenes_tag_set()) {
      const auto& k = c.per_class[t];
      sum += k.tp + k.fp + k.fn == 0 ? 0.0 : iou(k);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

fs::path grid_relpath(const std::string& scene, const std::string& sample) {
  return fs::path(scene) / sample / "labels.occ";
}

std::vector<std::pair<std::string, std::string>> list_grids(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& scene : fs::directory_iterator(dir)) {
    if (!scene.is_directory()) continue;
    for (const auto& sample : fs::directory_iterator(scene.path())) {
      if (sample.is_directory() && fs::exists(sample.path() / "labels.occ")) {
        out.emplace_back(scene.path().filename().string(), sample.path().filename().string());
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

EvalReport evaluate_run(const fs::path& gt_dir, const fs::path& pred_dir, MiouMode mode, int jobs) {
  std::error_code ec;
  if (!fs::is_directory(gt_dir, ec)) throw IoError("ground truth directory not found: " + gt_dir.string());
  if (!fs::is_directory(pred_dir, ec)) throw IoError("prediction directory not found: " + pred_dir.string());
  EvalReport rep;
  rep.mode = mode;
  const auto gts = list_grids(gt_dir);
  const auto preds = list_grids(pred_dir);
  std::vector<std::pair<std::string, std::string>> both;
  for (const auto& k : gts) {
    if (std::binary_search(preds.begin(), preds.end(), k)) {
      both.push_back(k);
    } else {
      rep.missing.push_back(k.first + "/" + k.second);
    }
  }
  for (const auto& k : preds) {
    if (!std::binary_search(gts.begin(), gts.end(), k)) rep.unexpected.push_back(k.first + "/" + k.second);
  }
  std::vector<std::optional<KeyframeResult>> rows(both.size());
  std::vector<std::string> errors(both.size());
  util::parallel_for(both.size(), jobs, [&](std::size_t i) {
    const auto& [scene, sample] = both[i];
    const fs::path rel = grid_relpath(scene, sample);
    occ::VoxelGrid g, p;
    try {
      g = occ::read_grid(gt_dir / rel);
    } catch (const Error& e) {
      errors[i] = scene + "/" + sample + ": ground truth: " + e.what();
      return;
    }
    try {
      p = occ::read_grid(pred_dir / rel);
    } catch (const Error& e) {
      errors[i] = scene + "/" + sample + ": prediction: " + e.what();
      return;
    }
    if (!(g.spec == p.spec)) {
      errors[i] = scene + "/" + sample + ": grid specs differ";
      return;
    }
    KeyframeResult r;
    r.scene = scene;
    r.sample = sample;
    r.counts = confusion(p, g);
    r.sc_iou = iou(r.counts);
    r.ssc_miou = miou(r.counts, mode);
    rows[i] = std::move(r);
  });
  for (std::size_t i = 0; i < both.size(); ++i) {
    if (!errors[i].empty()) {
      rep.malformed.push_back(errors[i]);
      continue;
    }
    rep.total += rows[i]->counts;
    rep.keyframes.push_back(std::move(*rows[i]));
  }
  rep.sc_iou = iou(rep.total);
  rep.ssc_miou = miou(rep.total, mode);
  return rep;
}

namespace {

nlohmann::ordered_json counts_json(const ConfusionCounts& c) {
  nlohmann::ordered_json j;
  j["tp"] = c.binary.tp;
  j["fp"] = c.binary.fp;
  j["fn"] = c.binary.fn;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (auto t : c.present_classes()) {
    const auto& k = c.per_class[t];
    per[std::to_string(t)] = {{"tp", k.tp}, {"fp", k.fp}, {"fn", k.fn}, {"iou", iou(k)}};
  }
  j["per_class"] = per;
  return j;
}

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["miou_mode"] = mode == MiouMode::Present ? "present" : "fixed";
  j["aggregate"] = {{"keyframes", keyframes.size()},
                    {"sc_iou", sc_iou},
                    {"ssc_miou", opt_json(ssc_miou)},
                    {"counts", counts_json(total)}};
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : keyframes) {
    rows.push_back({{"scene", r.scene},
                    {"sample", r.sample},
                    {"sc_iou", r.sc_iou},
                    {"ssc_miou", opt_json(r.ssc_miou)},
                    {"counts", counts_json(r.counts)}});
  }
  j["keyframes"] = rows;
  j["missing"] = missing;
  j["malformed"] = malformed;
  j["unexpected"] = unexpected;
  return j.dump(2) + "\n";
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  std::size_t w = 6;
  for (const auto& r : keyframes) w = std::max(w, r.scene.size() + 1 + r.sample.size());
  auto pad = [&](const std::string& s) { return s + std::string(w - std::min(w, s.size()) + 2, ' '); };
  os << pad("sample") << "SC_IoU    SSC_mIoU\n";
  for (const auto& r : keyframes) {
    os << pad(r.scene + "/" + r.sample) << fmt(r.sc_iou) << "    "
       << (r.ssc_miou ? fmt(*r.ssc_miou) : "n/a") << "\n";
  }
  os << pad("total") << fmt(sc_iou) << "    " << (ssc_miou ? fmt(*ssc_miou) : "n/a") << "\n";
  os << "keyframes evaluated: " << keyframes.size() << "\n";
  os << "mIoU mode: " << (mode == MiouMode::Present ? "present" : "fixed") << "\n";
  for (const auto& m : missing) os << "missing prediction: " << m << "\n";
  for (const auto& m : malformed) os << "malformed: " << m << "\n";
  for (const auto& m : unexpected) os << "no ground truth for: " << m << "\n";
  return os.str();
}

void write_report(const EvalReport& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto j = r.to_json();
  const auto t = r.to_text();
  std::ofstream(out_dir / "report.json", std::ios::binary) << j;
  std::ofstream(out_dir / "report.txt", std::ios::binary) << t;
  if (!fs::exists(out_dir / "report.json")) throw IoError("cannot write report in " + out_dir.string());
}

}  // namespace parkocc::eval
