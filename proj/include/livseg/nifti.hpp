#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <variant>
#include <vector>

#include "livseg/volume.hpp"

namespace livseg {

class NiftiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NIfTI-1 datatype codes accepted by the reader.
enum class ElementKind : std::int16_t {
  uint8 = 2,
  int16 = 4,
  int32 = 8,
  float32 = 16,
  float64 = 64,
};

/// A decoded NIfTI-1 file: native voxel order, values exactly as stored.
///
/// Scaling fields (scl_slope/scl_inter) are not applied. Four dimensional files are
/// read as a stack of `channels` 3D volumes laid out one after the other.
struct NiftiImage {
  Shape shape;
  std::size_t channels = 1;
  Spacing spacing;
  Orientation orientation;
  std::variant<std::vector<std::uint8_t>, std::vector<std::int16_t>, std::vector<std::int32_t>,
               std::vector<float>, std::vector<double>>
      data;

  ElementKind kind() const;
  std::size_t voxel_count() const { return shape.size() * channels; }
};

NiftiImage read_volume(const std::filesystem::path& path);
/// Gzip-compressed iff the path ends in ".gz".
void write_volume(const NiftiImage& image, const std::filesystem::path& path);

/// Integer-kind image with values in {0,1,2}.
LabelMap to_label_map(const NiftiImage& image);
/// Image with values in [0,1]; `channel` selects a slot of a 4D stack.
ProbVolume to_prob_volume(const NiftiImage& image, std::size_t channel = 0);
ProbMap to_prob_map(const NiftiImage& image);

NiftiImage to_image(const LabelMap& seg);
NiftiImage to_image(const BinaryMask& mask);
NiftiImage to_image(const ProbVolume& prob);
NiftiImage to_image(const ProbMap& prob);

LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const LabelMap& seg, const std::filesystem::path& path);

}  // namespace livseg
