#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "livseg/volume.hpp"

namespace livseg {

/// Voxel neighborhood: 6 face neighbors or all 26 face/edge/vertex neighbors.
enum class Connectivity { face = 6, full = 26 };

/// Connected components of a binary mask.
///
/// Ids run 1..count in order of each component's first voxel in linear scan order;
/// id 0 is background. Voxel lists are stored contiguously per component.
class ComponentLabeling {
 public:
  ComponentLabeling() = default;
  ComponentLabeling(Volume<std::int32_t> ids, std::vector<std::size_t> offsets,
                    std::vector<std::size_t> voxels)
      : ids_(std::move(ids)), offsets_(std::move(offsets)), voxels_(std::move(voxels)) {}

  std::size_t count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  const Volume<std::int32_t>& ids() const { return ids_; }
  std::size_t size_of(std::size_t id) const { return offsets_[id] - offsets_[id - 1]; }
  /// Linear indices of component `id` (1-based), ascending.
  std::span<const std::size_t> voxels(std::size_t id) const {
    return {voxels_.data() + offsets_[id - 1], size_of(id)};
  }
  /// Id of the component with the most voxels; earliest id wins ties. 0 if empty.
  std::size_t largest() const;

 private:
  Volume<std::int32_t> ids_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> voxels_;
};

ComponentLabeling label_components(const BinaryMask& mask, Connectivity c = Connectivity::full);

BinaryMask keep_largest_component(const BinaryMask& mask, Connectivity c = Connectivity::full);

/// Sets every background voxel that cannot reach the grid border through background
/// (under `background_connectivity`) to foreground.
BinaryMask fill_holes(const BinaryMask& mask, Connectivity background_connectivity = Connectivity::face);

enum class MorphOp { dilate, erode, close };

/// Lattice morphology with the structuring element "center plus neighbors under
/// `element`", applied `iterations` times. Voxels outside the grid are background;
/// closing is evaluated on a grid padded so that the dilation is never clipped.
BinaryMask binary_morph(const BinaryMask& mask, MorphOp op, Connectivity element = Connectivity::full,
                        int iterations = 1);

/// Foreground voxels with a background 6-neighbor (the grid edge counts as background).
BinaryMask extract_boundary(const BinaryMask& mask);

/// Neighbor offsets (di, dj, dk) of a connectivity, center excluded.
std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c);

}  // namespace livseg
