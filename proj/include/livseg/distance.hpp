#pragma once

#include <vector>

#include "livseg/volume.hpp"

namespace livseg {

/// Exact squared Euclidean distance (mm²) from every voxel center to the nearest
/// site voxel, honoring anisotropic spacing. Separable lower-envelope algorithm
/// (Felzenszwalb and Huttenlocher). Voxels are +inf when there are no sites.
Volume<double> squared_distance_transform(const BinaryMask& sites);

/// Distance (mm) from each foreground voxel of `from`, in linear scan order, to the
/// nearest foreground voxel of `to`. The transform is evaluated on the bounding box
/// of both sets only, which leaves the result unchanged.
std::vector<double> distances_to(const BinaryMask& from, const BinaryMask& to);

}  // namespace livseg
