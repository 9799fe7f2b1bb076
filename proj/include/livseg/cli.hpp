#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "livseg/analysis.hpp"
#include "livseg/metrics.hpp"
#include "livseg/pipeline.hpp"
#include "livseg/stats.hpp"

namespace livseg::cli {

/// Invalid configuration or command line; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  PipelineMode mode = PipelineMode::multiclass;
  PostprocessConfig postprocess;
  double threshold = 0.5;
  MetricOptions metrics;
  StdKind std_kind = StdKind::population;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;  // 0 = one per hardware thread
  std::filesystem::path manifest;
  std::filesystem::path out = ".";

  // plan-folds
  std::size_t folds = 5;
  double val_fraction = 8.0 / 48.0;

  // bbox
  PatchSpec patch;

  // compare
  std::filesystem::path metrics_a;
  std::filesystem::path metrics_b;
  std::vector<std::string> compare_metrics;          // empty = every default metric
  std::map<std::string, Hypothesis> hypotheses;      // per-metric overrides

  /// Throws ConfigError when a field is outside its documented range.
  void validate() const;
};

/// Overlays the keys of a JSON config document on `base`. Unknown keys are errors.
RunConfig merge_config_json(RunConfig base, const std::string& json_text);
RunConfig merge_config_file(RunConfig base, const std::filesystem::path& path);

/// One manifest row: case id, named input files (resolved against the manifest's
/// directory) and the optional phase label.
struct ManifestRow {
  std::string case_id;
  std::map<std::string, std::filesystem::path> files;
  std::optional<std::string> phase;

  const std::filesystem::path* file(const std::string& column) const;
};

/// Columns holding file paths; every other column except case_id and phase is an error.
inline const std::vector<std::string>& manifest_file_columns() {
  static const std::vector<std::string> cols{"prob", "liver_prob", "tumor_prob", "gt", "pred", "seg"};
  return cols;
}

/// Reads a manifest CSV; case ids must be unique and non-empty.
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

/// Defaults per metric column: overlap scores A>B (higher is better), distances
/// and burden error A<B.
Hypothesis default_hypothesis(const std::string& metric);
std::vector<std::string> default_compare_metrics();

/// Subcommands. Each writes into cfg.out and returns an exit code; `log` receives
/// one progress line per case and a summary.
int cmd_run(const RunConfig& cfg, std::ostream& log);
int cmd_evaluate(const RunConfig& cfg, std::ostream& log);
int cmd_postprocess(const RunConfig& cfg, std::ostream& log);
int cmd_fuse(const RunConfig& cfg, std::ostream& log);
int cmd_uncertainty(const RunConfig& cfg, std::ostream& log);
int cmd_bbox(const RunConfig& cfg, std::ostream& log);
int cmd_plan_folds(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);

/// Full command-line entry point.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace livseg::cli
