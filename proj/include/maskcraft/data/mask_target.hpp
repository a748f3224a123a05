#pragma once

#include <vector>

#include "maskcraft/box.hpp"
#include "maskcraft/data/sample.hpp"

namespace maskcraft::data {

/// side x side training target, row-major {0, 1}.
struct MaskTarget {
  int side = 0;
  std::vector<float> values;
};

/// Crops the instance mask to `box` (the pixels the box touches, clipped to
/// the image), bilinearly resamples the {0,1} crop to side x side at cell
/// centers with edge replication, and thresholds at 0.5. Every side is produced from the
/// full-resolution mask. Throws GeometryError for a box with area <= 0.
MaskTarget make_mask_target(const InstanceAnnotation& annotation, const Box& box, int side);

}  // namespace maskcraft::data
