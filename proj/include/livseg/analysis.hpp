#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "livseg/morphology.hpp"
#include "livseg/volume.hpp"

namespace livseg {

/// Inclusive voxel bounding box.
struct BBox {
  std::array<std::size_t, 3> min{};
  std::array<std::size_t, 3> max{};

  std::array<std::size_t, 3> extent() const {
    return {max[0] - min[0] + 1, max[1] - min[1] + 1, max[2] - min[2] + 1};
  }
  std::array<double, 3> extent_mm(const Spacing& s) const;
  bool operator==(const BBox&) const = default;
};

enum class BBoxTarget { tumor_lesions, overall_liver };

std::string_view to_string(BBoxTarget t);

/// One box per tumor component, or one box for the whole overall-liver mask.
std::vector<BBox> component_bboxes(const LabelMap& seg, BBoxTarget target,
                                   Connectivity c = Connectivity::full);

struct PatchSpec {
  std::array<std::size_t, 3> size{256, 256, 64};
  std::array<double, 3> overlap{0.0, 0.0, 0.0};  // fraction per axis, in [0,1)

  void validate() const;
};

/// Fraction of boxes whose extent fits the patch on every axis (1 for no boxes).
double patch_coverage(std::span<const BBox> boxes, const PatchSpec& patch);

struct PatchGrid {
  std::array<std::size_t, 3> patch_size{};  // clamped to the volume
  std::vector<std::array<std::size_t, 3>> origins;
};

/// Origins at stride ceil(size * (1 - overlap)) per axis, the last patch shifted
/// back to end at the volume edge. Patches larger than the volume are clamped to it.
PatchGrid plan_patch_grid(const Shape& shape, const PatchSpec& patch);

/// A model output for one patch: per-channel probabilities on the patch lattice.
struct PatchFragment {
  std::array<std::size_t, 3> origin{};
  std::vector<ProbVolume> channels;
};

/// Per voxel and channel, the arithmetic mean of every covering fragment.
/// Throws std::invalid_argument if a fragment leaves the volume, the channel
/// counts disagree, or a voxel is left uncovered.
std::vector<ProbVolume> aggregate_patch_probabilities(std::span<const PatchFragment> fragments,
                                                      const Shape& shape, const Spacing& spacing);

enum class Phase { arterial, delayed, non_contrast, portal, unknown };
inline constexpr std::size_t kPhaseCount = 5;

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view text);

struct CaseRecord {
  std::string id;
  Phase phase = Phase::unknown;
};

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// Phase-stratified k-fold split: every case is tested in exactly one fold, and the
/// remaining cases of each fold are split into validation (val_fraction of them)
/// and training so that each phase stays within one case of its proportional share.
std::vector<Fold> stratified_kfold(std::span<const CaseRecord> cases, std::size_t k, double val_fraction,
                                   std::uint64_t seed);

}  // namespace livseg
