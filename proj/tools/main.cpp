// parkocc command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

#include "parkocc/app/commands.hpp"
#include "parkocc/dataset/validate.hpp"
#include "parkocc/error.hpp"
#include "parkocc/util/parallel.hpp"

namespace fs = std::filesystem;
using namespace parkocc;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;
constexpr int kStageFailure = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool overwrite = false;

  void add_to(CLI::App* app, bool with_seed) {
    app->add_option("--config", config, "YAML run configuration")->check(CLI::ExistingFile);
    app->add_option("--out", out, "Run directory (overrides the config's output)");
    if (with_seed) app->add_option("--seed", seed, "Base seed for scene generation");
    app->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app->add_flag("--overwrite", overwrite, "Replace existing outputs");
  }

  app::RunConfig load() const {
    app::RunConfig cfg = config.empty() ? app::RunConfig{} : app::load_run_config(config);
    if (!out.empty()) cfg.output = out;
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    cfg.validate();
    util::set_default_jobs(cfg.jobs);
    return cfg;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_findings(const dataset::ValidationReport& rep) {
  for (const auto& f : rep.findings) std::cout << "finding: " << f.code << " at " << f.where << ": " << f.message << "\n";
  std::cout << rep.rows_checked << " rows, " << rep.files_checked << " files checked, " << rep.findings.size()
            << " findings\n";
}

// Refuses to touch a non-empty output directory unless --overwrite was given.
bool output_blocked(const fs::path& dir, bool overwrite) {
  std::error_code ec;
  if (overwrite || !fs::exists(dir, ec) || fs::is_empty(dir, ec)) return false;
  std::cerr << "error: " << dir.string() << " is not empty (use --overwrite)\n";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Synthetic parking-lot LiDAR datasets, dense occupancy ground truth and occupancy metrics"};
  cli.require_subcommand(1);

  Common synth_opts;
  auto* synth = cli.add_subcommand("synth", "Simulate scenes and write a nuScenes-style dataset");
  synth_opts.add_to(synth, true);

  Common gt_opts;
  std::string gt_dataset, baseline_out;
  bool no_baseline = false, no_oracle = false;
  auto* gt = cli.add_subcommand("gt", "Build dense occupancy ground truth for every keyframe");
  gt_opts.add_to(gt, false);
  gt->add_option("--dataset", gt_dataset, "Dataset root (default <out>/dataset)");
  gt->add_option("--baseline-out", baseline_out, "Where to write single-scan baseline predictions");
  gt->add_flag("--no-baseline", no_baseline, "Skip baseline predictions");
  gt->add_flag("--no-oracle", no_oracle, "Skip the analytic comparison");

  Common eval_opts;
  std::string eval_gt, eval_pred, miou_mode;
  auto* ev = cli.add_subcommand("eval", "Score predictions against ground truth (SC IoU, SSC mIoU)");
  eval_opts.add_to(ev, false);
  ev->add_option("--gt", eval_gt, "Ground-truth grid directory (default <out>/gts)");
  ev->add_option("--pred", eval_pred, "Prediction grid directory (default <out>/baseline)");
  ev->add_option("--miou-mode", miou_mode, "present or fixed")->check(CLI::IsMember({"present", "fixed"}));

  std::string validate_root;
  auto* val = cli.add_subcommand("validate", "Check a dataset tree for schema and payload problems");
  val->add_option("dataset", validate_root, "Dataset root")->required();

  std::string export_in, export_out, export_labels;
  auto* exp = cli.add_subcommand("export-ply", "Write a grid or point file as ASCII PLY");
  exp->add_option("input", export_in, "labels.occ grid or .pcd.bin point file")->required()->check(CLI::ExistingFile);
  exp->add_option("output", export_out, "PLY path")->required();
  exp->add_option("--labels", export_labels, "Label file colouring a point file")->check(CLI::ExistingFile);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (*synth) {
      const auto cfg = synth_opts.load();
      const auto dir = cfg.dataset_dir();
      if (output_blocked(dir, synth_opts.overwrite)) return kUsage;
      const auto rep = app::run_synth(cfg, dir, synth_opts.overwrite, &std::cout);
      print_findings(rep);
      std::cout << "dataset written to " << dir.string() << " (digest " << rep.digest << ") in "
                << seconds_since(t0) << " s\n";
      return rep.ok() ? kOk : kFindings;
    }
    if (*gt) {
      const auto cfg = gt_opts.load();
      app::GtOptions o;
      o.dataset_dir = gt_dataset.empty() ? cfg.dataset_dir() : fs::path(gt_dataset);
      o.out_dir = cfg.gt_dir();
      o.baseline_dir = no_baseline ? fs::path() : (baseline_out.empty() ? cfg.baseline_dir() : fs::path(baseline_out));
      o.overwrite = gt_opts.overwrite;
      o.oracle = !no_oracle;
      if (output_blocked(o.out_dir, o.overwrite)) return kUsage;
      if (!o.baseline_dir.empty() && output_blocked(o.baseline_dir, o.overwrite)) return kUsage;
      const auto rep = app::run_gt(cfg, o, &std::cout);
      std::cout << rep.keyframes.size() - rep.failures() << " of " << rep.keyframes.size()
                << " keyframes written to " << o.out_dir.string() << " in " << seconds_since(t0) << " s\n";
      return rep.failures() == 0 ? kOk : kStageFailure;
    }
    if (*ev) {
      auto cfg = eval_opts.load();
      if (miou_mode == "fixed") cfg.miou_mode = eval::MiouMode::Fixed;
      if (miou_mode == "present") cfg.miou_mode = eval::MiouMode::Present;
      app::EvalOptions o;
      o.gt_dir = eval_gt.empty() ? cfg.gt_dir() : fs::path(eval_gt);
      o.pred_dir = eval_pred.empty() ? cfg.baseline_dir() : fs::path(eval_pred);
      o.out_dir = cfg.eval_dir();
      std::error_code ec;
      if (!eval_opts.overwrite && fs::exists(o.out_dir / "report.json", ec)) {
        std::cerr << "error: " << (o.out_dir / "report.json").string() << " exists (use --overwrite)\n";
        return kUsage;
      }
      const auto rep = app::run_eval(cfg, o);
      std::cout << rep.to_text();
      std::cout << "reports written to " << o.out_dir.string() << "\n";
      const bool clean = rep.missing.empty() && rep.malformed.empty() && rep.unexpected.empty();
      return clean ? kOk : kFindings;
    }
    if (*val) {
      const auto rep = dataset::validate_dataset(validate_root);
      print_findings(rep);
      return rep.ok() ? kOk : kFindings;
    }
    if (*exp) {
      app::run_export(export_in, export_out, export_labels);
      std::cout << "wrote " << export_out << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageFailure;
  }
  return kUsage;
}
