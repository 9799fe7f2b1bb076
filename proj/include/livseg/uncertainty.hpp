#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livseg/morphology.hpp"
#include "livseg/volume.hpp"

namespace livseg {

enum class LesionStatus { unknown, tp, fp };

std::string_view to_string(LesionStatus s);

/// One predicted tumor component.
struct Lesion {
  std::size_t id = 0;
  std::vector<std::size_t> voxels;  // linear indices, ascending
  double volume_mm3 = 0.0;
  std::optional<double> uncertainty;
  LesionStatus status = LesionStatus::unknown;

  std::size_t voxel_count() const { return voxels.size(); }
};

struct LesionReport {
  std::string case_id;
  std::vector<Lesion> lesions;
  /// Rank correlation of (uncertainty, volume); set when at least two lesions
  /// have scores and the ranks vary.
  std::optional<double> spearman_uncertainty_volume;
};

/// One lesion per connected component of the tumor class.
std::vector<Lesion> extract_lesions(const LabelMap& seg, Connectivity c = Connectivity::full);

/// One minus the mean tumor probability over the lesion voxels.
double lesion_uncertainty(const Lesion& lesion, const ProbVolume& tumor_prob);

/// TP when the lesion shares at least one voxel with the ground-truth tumor class.
/// `seg` is the map the lesions were extracted from and must share gt's grid.
void classify_lesions(std::vector<Lesion>& lesions, const LabelMap& seg, const LabelMap& gt);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Pearson correlation of the average-rank vectors. Throws std::invalid_argument on
/// length mismatch, fewer than two samples, or constant ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// extract_lesions + lesion_uncertainty + (optional) classify_lesions + spearman.
LesionReport build_lesion_report(std::string case_id, const LabelMap& seg, const ProbVolume& tumor_prob,
                                 const LabelMap* gt = nullptr, Connectivity c = Connectivity::full);

}  // namespace livseg
