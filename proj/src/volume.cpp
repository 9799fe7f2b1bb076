#include "livseg/volume.hpp"

#include <algorithm>
#include <cmath>

namespace livseg {

ProbMap::ProbMap(std::vector<ProbVolume> channels) : channels_(std::move(channels)) {
  if (channels_.size() < 2 || channels_.size() > 3) {
    throw std::invalid_argument("probability map must have 2 or 3 channels");
  }
  const auto& first = channels_.front();
  for (const auto& ch : channels_) {
    require_same_grid(first, ch, "probability channels");
    for (float p : ch.data()) {
      if (!(p >= 0.0F && p <= 1.0F)) throw std::invalid_argument("probability outside [0,1]");
    }
  }
  if (channels_.size() == 3) {
    for (std::size_t v = 0; v < first.size(); ++v) {
      const double sum = double(channels_[0][v]) + channels_[1][v] + channels_[2][v];
      if (std::abs(sum - 1.0) > 1e-4) {
        throw std::invalid_argument("3-class probabilities do not sum to 1 at voxel " +
                                    std::to_string(v));
      }
    }
  }
}

void validate_labels(const LabelMap& seg) {
  for (Label l : seg.data()) {
    if (static_cast<std::uint8_t>(l) > 2) {
      throw std::invalid_argument("label value outside {0,1,2}");
    }
  }
}

BinaryMask mask_of(const LabelMap& seg, std::initializer_list<Label> classes) {
  BinaryMask out = seg.like<std::uint8_t>(0);
  auto src = seg.data();
  auto dst = out.data();
  for (std::size_t v = 0; v < src.size(); ++v) {
    dst[v] = std::find(classes.begin(), classes.end(), src[v]) != classes.end() ? 1 : 0;
  }
  return out;
}

}  // namespace livseg
