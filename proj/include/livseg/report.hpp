#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livseg/analysis.hpp"
#include "livseg/metrics.hpp"
#include "livseg/stats.hpp"
#include "livseg/uncertainty.hpp"

namespace livseg {

/// printf "%.6g"; every float in every report goes through here.
std::string format_float(double v);
/// The double nearest to format_float(v), for JSON emission.
double round6(double v);

std::string case_metrics_csv(std::span<const CaseMetrics> cases);
std::string aggregate_json(const AggregateReport& report, StdKind kind);

std::string lesions_csv(std::span<const LesionReport> reports);
std::string lesions_json(std::span<const LesionReport> reports);

std::string significance_csv(std::span<const SignificanceResult> results);
std::string significance_json(std::span<const SignificanceResult> results);

std::string folds_json(std::span<const Fold> folds);
std::string folds_csv(std::span<const Fold> folds);

struct BBoxRow {
  std::string case_id;
  BBoxTarget target = BBoxTarget::tumor_lesions;
  std::size_t component = 0;
  BBox box;
  Spacing spacing;
};
std::string bbox_csv(std::span<const BBoxRow> rows);

/// Plain comma-separated table with a header row; no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Per-case metric columns read back from case_metrics_csv output.
struct MetricTable {
  std::vector<std::string> case_ids;
  std::map<std::string, std::vector<std::optional<double>>> columns;
};

MetricTable parse_metric_table(const CsvTable& csv);

}  // namespace livseg
