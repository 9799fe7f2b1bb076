#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "livseg/morphology.hpp"
#include "livseg/volume.hpp"

namespace livseg {

enum class PipelineMode { multiclass, dual_binary };

std::string_view to_string(PipelineMode mode);
PipelineMode parse_pipeline_mode(std::string_view text);

struct MorphStep {
  Connectivity element = Connectivity::full;
  int iterations = 1;
};

struct PostprocessConfig {
  Connectivity component_connectivity = Connectivity::full;
  Connectivity hole_connectivity = Connectivity::face;
  MorphStep dilation;  // step 2, multiclass only
  MorphStep closing;   // step 3
  bool keep_largest_liver = true;
  bool fill_liver_holes = true;
  bool remove_outside_tumors = true;
  bool close_tumors = true;

  /// Throws std::invalid_argument when an enabled step has iterations < 1.
  void validate() const;
};

/// Per voxel the most probable class; ties go to the higher class index.
LabelMap argmax_labelization(const ProbMap& prob);

/// Foreground iff probability >= threshold, threshold in (0,1).
BinaryMask threshold_binary(const ProbVolume& prob, double threshold = 0.5);

/// 2 where liver and tumor, 1 where liver only, 0 elsewhere.
LabelMap fuse_dual_binary(const BinaryMask& liver, const BinaryMask& tumor);

/// The three post-processing steps, in order:
///  1. keep the largest overall-liver component and fill its holes (filled voxels are
///     healthy liver; dropped components become background);
///  2. remove tumor outside the liver: in multiclass mode a tumor component whose
///     dilation meets no healthy-liver voxel is erased, in dual-binary mode tumor is
///     masked by the overall liver;
///  3. close the tumor mask, keeping added voxels only inside the overall liver.
LabelMap postprocess(const LabelMap& seg, PipelineMode mode, const PostprocessConfig& cfg = {});

/// Inputs of one case: a 3-channel map (multiclass) or liver and tumor
/// foreground probabilities (dual binary).
struct MulticlassInput {
  ProbMap probabilities;
};
struct DualBinaryInput {
  ProbVolume liver;
  ProbVolume tumor;
};
using PipelineInput = std::variant<MulticlassInput, DualBinaryInput>;

LabelMap run_pipeline(const PipelineInput& input, PipelineMode mode, const PostprocessConfig& cfg = {},
                      double threshold = 0.5);

/// The tumor probability an uncertainty score reads for this input.
const ProbVolume& tumor_probability(const PipelineInput& input);

}  // namespace livseg
