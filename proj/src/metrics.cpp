#include "livseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "livseg/distance.hpp"
#include "livseg/morphology.hpp"

namespace livseg {

BinaryMask overall_liver_mask(const LabelMap& seg) { return mask_of(seg, {Label::liver, Label::tumor}); }

BinaryMask tumor_mask(const LabelMap& seg) { return mask_of(seg, {Label::tumor}); }

std::optional<double> CaseMetrics::tumor_burden_abs_error() const {
  if (!tumor_burden_pred || !tumor_burden_gt) return std::nullopt;
  return std::abs(*tumor_burden_pred - *tumor_burden_gt);
}

double dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_grid(a, b, "dice");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t v = 0; v < a.size(); ++v) {
    const bool x = a[v] != 0;
    const bool y = b[v] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * double(both) / double(na + nb);
}

SurfaceDistances surface_distances(const BinaryMask& a, const BinaryMask& b) {
  require_same_grid(a, b, "surface distances");
  const BinaryMask da = extract_boundary(a);
  const BinaryMask db = extract_boundary(b);
  return {distances_to(da, db), distances_to(db, da)};
}

double surface_dice(const SurfaceDistances& d, double tau_mm) {
  if (tau_mm < 0.0) throw std::invalid_argument("surface dice tolerance must be >= 0");
  const std::size_t total = d.a_to_b.size() + d.b_to_a.size();
  if (total == 0) return 1.0;
  auto within = [&](const std::vector<double>& ds) {
    return std::count_if(ds.begin(), ds.end(), [&](double x) { return x <= tau_mm + kToleranceSlackMm; });
  };
  return double(within(d.a_to_b) + within(d.b_to_a)) / double(total);
}

double surface_dice(const BinaryMask& a, const BinaryMask& b, double tau_mm) {
  return surface_dice(surface_distances(a, b), tau_mm);
}

double percentile_of(std::vector<double> values, double percentile) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (percentile < 0.0 || percentile > 100.0) throw std::invalid_argument("percentile outside [0,100]");
  const double pos = percentile / 100.0 * double(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + std::ptrdiff_t(lo), values.end());
  const double lo_v = values[lo];
  if (lo + 1 >= values.size() || pos == double(lo)) return lo_v;
  const double hi_v = *std::min_element(values.begin() + std::ptrdiff_t(lo) + 1, values.end());
  return lo_v + (hi_v - lo_v) * (pos - double(lo));
}

std::optional<double> hausdorff(const SurfaceDistances& d, double percentile) {
  if (d.a_to_b.empty() && d.b_to_a.empty()) return 0.0;
  if (d.a_to_b.empty() || d.b_to_a.empty()) return std::nullopt;
  return std::max(percentile_of(d.a_to_b, percentile), percentile_of(d.b_to_a, percentile));
}

std::optional<double> hausdorff(const BinaryMask& a, const BinaryMask& b, double percentile) {
  return hausdorff(surface_distances(a, b), percentile);
}

std::optional<double> assd(const SurfaceDistances& d) {
  if (d.a_to_b.empty() && d.b_to_a.empty()) return 0.0;
  if (d.a_to_b.empty() || d.b_to_a.empty()) return std::nullopt;
  const double sum = std::accumulate(d.a_to_b.begin(), d.a_to_b.end(), 0.0) +
                     std::accumulate(d.b_to_a.begin(), d.b_to_a.end(), 0.0);
  return sum / double(d.a_to_b.size() + d.b_to_a.size());
}

std::optional<double> assd(const BinaryMask& a, const BinaryMask& b) { return assd(surface_distances(a, b)); }

std::optional<double> tumor_burden(const LabelMap& seg) {
  std::size_t liver = 0, tumor = 0;
  for (Label l : seg.data()) {
    liver += l != Label::background;
    tumor += l == Label::tumor;
  }
  if (liver == 0) return std::nullopt;
  const double voxel = voxel_volume_mm3(seg.spacing());
  return (double(tumor) * voxel) / (double(liver) * voxel);
}

double rmse_tumor_burden(std::span<const CaseMetrics> cases) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : cases) {
    if (const auto e = c.tumor_burden_abs_error()) {
      sum += *e * *e;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("no case with defined tumor burdens");
  return std::sqrt(sum / double(n));
}

namespace {

StructureMetrics score_structure(const BinaryMask& pred, const BinaryMask& gt, const MetricOptions& o) {
  const SurfaceDistances d = surface_distances(pred, gt);
  StructureMetrics m;
  m.dice = dice(pred, gt);
  m.surface_dice = surface_dice(d, o.tau_mm);
  m.hausdorff_mm = hausdorff(d, o.hd_percentile);
  m.assd_mm = assd(d);
  return m;
}

}  // namespace

CaseMetrics evaluate_case(const LabelMap& pred, const LabelMap& gt, const MetricOptions& options,
                          std::string case_id) {
  require_same_grid(pred, gt, "evaluate_case");
  CaseMetrics c;
  c.case_id = std::move(case_id);
  c.liver = score_structure(overall_liver_mask(pred), overall_liver_mask(gt), options);
  c.tumor = score_structure(tumor_mask(pred), tumor_mask(gt), options);
  c.tumor_burden_pred = tumor_burden(pred);
  c.tumor_burden_gt = tumor_burden(gt);
  return c;
}

const std::array<std::string, 8>& metric_names() {
  static const std::array<std::string, 8> names{
      "liver_dice", "liver_surface_dice", "liver_hausdorff_mm", "liver_assd_mm",
      "tumor_dice", "tumor_surface_dice", "tumor_hausdorff_mm", "tumor_assd_mm",
  };
  return names;
}

std::optional<double> metric_value(const CaseMetrics& c, const std::string& name) {
  const auto& names = metric_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    if (name == "tumor_burden_abs_error") return c.tumor_burden_abs_error();
    throw std::invalid_argument("unknown metric: " + name);
  }
  const auto idx = std::size_t(it - names.begin());
  const StructureMetrics& s = idx < 4 ? c.liver : c.tumor;
  switch (idx % 4) {
    case 0: return s.dice;
    case 1: return s.surface_dice;
    case 2: return s.hausdorff_mm;
    default: return s.assd_mm;
  }
}

const MetricSummary& AggregateReport::find(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw std::invalid_argument("unknown metric: " + name);
}

AggregateReport aggregate(std::span<const CaseMetrics> cases, StdKind kind) {
  if (cases.empty()) throw std::invalid_argument("aggregate needs at least one case");
  AggregateReport r;
  for (const auto& name : metric_names()) {
    MetricSummary s;
    s.name = name;
    std::vector<double> values;
    for (const auto& c : cases) {
      if (const auto v = metric_value(c, name)) values.push_back(*v);
    }
    s.defined = values.size();
    s.excluded = cases.size() - values.size();
    if (!values.empty()) {
      // Shifted by the first value: constant input gives mean == value, std == 0 exactly.
      const double shift = values.front();
      double offset = 0.0;
      for (double v : values) offset += v - shift;
      s.mean = shift + offset / double(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      const double denom = kind == StdKind::population ? double(values.size()) : double(values.size()) - 1.0;
      s.stddev = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
    }
    r.metrics.push_back(s);
  }
  for (const auto& c : cases) {
    if (c.tumor_burden_abs_error()) {
      ++r.burden_cases;
    } else {
      ++r.burden_excluded;
    }
  }
  if (r.burden_cases > 0) r.burden_rmse = rmse_tumor_burden(cases);
  return r;
}

}  // namespace livseg
