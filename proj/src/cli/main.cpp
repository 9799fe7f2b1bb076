#include <CLI11.hpp>

#include <ostream>

#include "livseg/cli.hpp"

namespace livseg::cli {

namespace {

/// Raw flag values; a flag overrides the config only when it was given.
struct Flags {
  std::string config;
  std::string manifest;
  std::string out;
  std::size_t jobs = 1;
  std::string mode;
  double threshold = 0.5;
  double tau_mm = 2.0;
  double hd_percentile = 100.0;
  std::string std_kind;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int component_connectivity = 26;
  int hole_connectivity = 6;
  int dilation_element = 26;
  int dilation_iterations = 1;
  int closing_element = 26;
  int closing_iterations = 1;
  bool no_keep_largest = false;
  bool no_fill_holes = false;
  bool no_remove_outside = false;
  bool no_closing = false;
  std::size_t folds = 5;
  double val_fraction = 8.0 / 48.0;
  std::vector<std::size_t> patch;
  std::vector<double> patch_overlap;
  std::string metrics_a;
  std::string metrics_b;
  std::vector<std::string> compare_metrics;
  std::vector<std::string> hypotheses;
};

Connectivity to_connectivity(int c) { return c == 6 ? Connectivity::face : Connectivity::full; }

const auto kConnectivity = CLI::IsMember({6, 26});

void add_common(CLI::App* cmd, Flags& f, bool manifest = true) {
  cmd->add_option("--config", f.config, "JSON config file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  if (manifest) cmd->add_option("--manifest", f.manifest, "CSV manifest: case_id plus input paths");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--jobs", f.jobs, "Worker threads over cases (0 = all hardware threads)");
}

void add_mode(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mode", f.mode, "Pipeline: multiclass or dual-binary")
      ->check(CLI::IsMember({"multiclass", "dual-binary", "dual_binary"}));
}

void add_metric_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tau-mm", f.tau_mm, "Surface-dice tolerance in mm");
  cmd->add_option("--hd-percentile", f.hd_percentile, "Hausdorff percentile (100 = maximum, 95 = HD95)");
  cmd->add_option("--std", f.std_kind, "Aggregate standard deviation: population or sample")
      ->check(CLI::IsMember({"population", "sample"}));
}

void add_postprocess_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--component-connectivity", f.component_connectivity, "Foreground connectivity (6 or 26)")
      ->check(kConnectivity);
  cmd->add_option("--hole-connectivity", f.hole_connectivity, "Background connectivity for hole filling")
      ->check(kConnectivity);
  cmd->add_option("--dilation-element", f.dilation_element, "Step-2 structuring element (6 or 26)")
      ->check(kConnectivity);
  cmd->add_option("--dilation-iterations", f.dilation_iterations, "Step-2 dilation iterations");
  cmd->add_option("--closing-element", f.closing_element, "Step-3 structuring element (6 or 26)")
      ->check(kConnectivity);
  cmd->add_option("--closing-iterations", f.closing_iterations, "Step-3 closing iterations");
  cmd->add_flag("--no-keep-largest", f.no_keep_largest, "Skip largest-liver-component selection");
  cmd->add_flag("--no-fill-holes", f.no_fill_holes, "Skip liver hole filling");
  cmd->add_flag("--no-remove-outside", f.no_remove_outside, "Skip removal of tumors outside the liver");
  cmd->add_flag("--no-closing", f.no_closing, "Skip tumor closing");
}

bool given(const CLI::App* cmd, const char* name) {
  try {
    return cmd->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  RunConfig cfg;
  if (given(cmd, "--config")) cfg = merge_config_file(cfg, f.config);
  if (given(cmd, "--manifest")) cfg.manifest = f.manifest;
  if (given(cmd, "--out")) cfg.out = f.out;
  if (given(cmd, "--jobs")) cfg.jobs = f.jobs;
  if (given(cmd, "--mode")) cfg.mode = parse_pipeline_mode(f.mode);
  if (given(cmd, "--threshold")) cfg.threshold = f.threshold;
  if (given(cmd, "--tau-mm")) cfg.metrics.tau_mm = f.tau_mm;
  if (given(cmd, "--hd-percentile")) cfg.metrics.hd_percentile = f.hd_percentile;
  if (given(cmd, "--std")) cfg.std_kind = f.std_kind == "sample" ? StdKind::sample : StdKind::population;
  if (given(cmd, "--alpha")) cfg.alpha = f.alpha;
  if (given(cmd, "--seed")) cfg.seed = f.seed;
  auto& pp = cfg.postprocess;
  if (given(cmd, "--component-connectivity")) pp.component_connectivity = to_connectivity(f.component_connectivity);
  if (given(cmd, "--hole-connectivity")) pp.hole_connectivity = to_connectivity(f.hole_connectivity);
  if (given(cmd, "--dilation-element")) pp.dilation.element = to_connectivity(f.dilation_element);
  if (given(cmd, "--dilation-iterations")) pp.dilation.iterations = f.dilation_iterations;
  if (given(cmd, "--closing-element")) pp.closing.element = to_connectivity(f.closing_element);
  if (given(cmd, "--closing-iterations")) pp.closing.iterations = f.closing_iterations;
  if (f.no_keep_largest) pp.keep_largest_liver = false;
  if (f.no_fill_holes) pp.fill_liver_holes = false;
  if (f.no_remove_outside) pp.remove_outside_tumors = false;
  if (f.no_closing) pp.close_tumors = false;
  if (given(cmd, "--folds")) cfg.folds = f.folds;
  if (given(cmd, "--val-fraction")) cfg.val_fraction = f.val_fraction;
  if (given(cmd, "--patch")) std::copy(f.patch.begin(), f.patch.end(), cfg.patch.size.begin());
  if (given(cmd, "--patch-overlap")) {
    std::copy(f.patch_overlap.begin(), f.patch_overlap.end(), cfg.patch.overlap.begin());
  }
  if (given(cmd, "--a")) cfg.metrics_a = f.metrics_a;
  if (given(cmd, "--b")) cfg.metrics_b = f.metrics_b;
  if (given(cmd, "--metrics")) cfg.compare_metrics = f.compare_metrics;
  for (const auto& h : f.hypotheses) {
    const auto eq = h.find('=');
    if (eq == std::string::npos) throw ConfigError("--hypothesis expects metric=A<B or metric=A>B");
    try {
      cfg.hypotheses[h.substr(0, eq)] = parse_hypothesis(h.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return cfg;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Liver and tumor segmentation: post-processing, evaluation and analysis"};
  app.require_subcommand(1);
  Flags f;

  auto* run = app.add_subcommand("run", "Probabilities to labels, metrics and lesion reports");
  add_common(run, f);
  add_mode(run, f);
  run->add_option("--threshold", f.threshold, "Dual-binary foreground threshold (>=)");
  add_metric_flags(run, f);
  add_postprocess_flags(run, f);
  run->add_option("--seed", f.seed, "Seed (recorded for reproducibility)");

  auto* evaluate = app.add_subcommand("evaluate", "Score predicted label maps against ground truth");
  add_common(evaluate, f);
  add_metric_flags(evaluate, f);

  auto* post = app.add_subcommand("postprocess", "Apply the three post-processing steps to label maps");
  add_common(post, f);
  add_mode(post, f);
  add_postprocess_flags(post, f);

  auto* fuse = app.add_subcommand("fuse", "Threshold and fuse liver and tumor probabilities");
  add_common(fuse, f);
  fuse->add_option("--threshold", f.threshold, "Foreground threshold (>=)");

  auto* unc = app.add_subcommand("uncertainty", "Lesion-wise uncertainty and TP/FP status");
  add_common(unc, f);
  unc->add_option("--component-connectivity", f.component_connectivity, "Lesion connectivity (6 or 26)")
      ->check(kConnectivity);

  auto* bbox = app.add_subcommand("bbox", "Bounding boxes of lesions and livers and patch coverage");
  add_common(bbox, f);
  bbox->add_option("--patch", f.patch, "Patch size in voxels: X Y Z")->expected(3);
  bbox->add_option("--patch-overlap", f.patch_overlap, "Patch overlap fractions: X Y Z")->expected(3);
  bbox->add_option("--component-connectivity", f.component_connectivity, "Lesion connectivity (6 or 26)")
      ->check(kConnectivity);

  auto* folds = app.add_subcommand("plan-folds", "Phase-stratified train/val/test folds");
  add_common(folds, f);
  folds->add_option("--folds", f.folds, "Number of folds");
  folds->add_option("--val-fraction", f.val_fraction, "Validation share of each fold's non-test cases");
  folds->add_option("--seed", f.seed, "Shuffle seed");

  auto* compare = app.add_subcommand("compare", "Paired significance tests between two metric tables");
  add_common(compare, f, false);
  compare->add_option("--a", f.metrics_a, "case_metrics.csv of pipeline A")->check(CLI::ExistingFile);
  compare->add_option("--b", f.metrics_b, "case_metrics.csv of pipeline B")->check(CLI::ExistingFile);
  compare->add_option("--alpha", f.alpha, "Significance level");
  compare->add_option("--metrics", f.compare_metrics, "Metric columns to compare");
  compare->add_option("--hypothesis", f.hypotheses, "Override direction: metric=A<B or metric=A>B");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  try {
    const RunConfig cfg = build_config(cmd, f);
    const std::string name = cmd->get_name();
    if (name == "run") return cmd_run(cfg, out);
    if (name == "evaluate") return cmd_evaluate(cfg, out);
    if (name == "postprocess") return cmd_postprocess(cfg, out);
    if (name == "fuse") return cmd_fuse(cfg, out);
    if (name == "uncertainty") return cmd_uncertainty(cfg, out);
    if (name == "bbox") return cmd_bbox(cfg, out);
    if (name == "plan-folds") return cmd_plan_folds(cfg, out);
    return cmd_compare(cfg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartial;
  }
}

}  // namespace livseg::cli
