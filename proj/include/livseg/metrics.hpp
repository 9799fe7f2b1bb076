#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "livseg/volume.hpp"

namespace livseg {

/// Distances closer than this to the surface-dice tolerance count as within it.
inline constexpr double kToleranceSlackMm = 1e-9;

struct MetricOptions {
  double tau_mm = 2.0;          // surface-dice tolerance
  double hd_percentile = 100.0;  // 100 = classic Hausdorff, 95 = HD95
};

/// Overlap and surface scores of one structure. An empty optional marks an
/// undefined value (exactly one of the two masks empty).
struct StructureMetrics {
  std::optional<double> dice;
  std::optional<double> surface_dice;
  std::optional<double> hausdorff_mm;
  std::optional<double> assd_mm;
};

struct CaseMetrics {
  std::string case_id;
  StructureMetrics liver;
  StructureMetrics tumor;
  std::optional<double> tumor_burden_pred;
  std::optional<double> tumor_burden_gt;

  /// |pred - gt| burden error, defined when both burdens are.
  std::optional<double> tumor_burden_abs_error() const;
};

/// Boundary-to-boundary distances in both directions, each in linear scan order
/// of the source boundary.
struct SurfaceDistances {
  std::vector<double> a_to_b;
  std::vector<double> b_to_a;
};

/// Classes {1,2}.
BinaryMask overall_liver_mask(const LabelMap& seg);
BinaryMask tumor_mask(const LabelMap& seg);

double dice(const BinaryMask& a, const BinaryMask& b);

SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b);

double surface_dice(const BinaryMask& a, const BinaryMask& b, double tau_mm);
double surface_dice(const SurfaceDistances& d, double tau_mm);

/// Symmetric percentile Hausdorff distance in mm. Defined when both masks are
/// empty (0) or both non-empty.
std::optional<double> hausdorff(const BinaryMask& a, const BinaryMask& b, double percentile = 100.0);
std::optional<double> hausdorff(const SurfaceDistances& d, double percentile = 100.0);

std::optional<double> assd(const BinaryMask& a, const BinaryMask& b);
std::optional<double> assd(const SurfaceDistances& d);

/// Linear-interpolation percentile of `values` (numpy's default rule).
double percentile_of(std::vector<double> values, double percentile);

/// Tumor volume over overall-liver volume; undefined for an empty liver.
std::optional<double> tumor_burden(const LabelMap& seg);

/// Root mean square burden error over cases with both burdens defined.
double rmse_tumor_burden(std::span<const CaseMetrics> cases);

CaseMetrics evaluate_case(const LabelMap& pred, const LabelMap& gt, const MetricOptions& options = {},
                          std::string case_id = {});

enum class StdKind { population, sample };

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t defined = 0;
  std::size_t excluded = 0;
};

struct AggregateReport {
  std::vector<MetricSummary> metrics;  // order of metric_names()
  std::optional<double> burden_rmse;
  std::size_t burden_cases = 0;
  std::size_t burden_excluded = 0;

  const MetricSummary& find(const std::string& name) const;
};

/// Column names of the eight per-structure metrics, liver first.
const std::array<std::string, 8>& metric_names();
std::optional<double> metric_value(const CaseMetrics& c, const std::string& name);

AggregateReport aggregate(std::span<const CaseMetrics> cases, StdKind kind = StdKind::population);

}  // namespace livseg
