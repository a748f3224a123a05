#pragma once

#include <vector>

#include <torch/torch.h>

#include "maskcraft/box.hpp"

namespace maskcraft::scaffold {

struct PyramidLevel {
  int stride = 0;
  torch::Tensor features;  // 1 x C x h x w
};

/// Multi-scale feature maps, finest first. Strides strictly increase and
/// every level has the same channel count.
struct FeaturePyramid {
  std::vector<PyramidLevel> levels;
  int image_height = 0;  // unpadded input size
  int image_width = 0;

  int channels() const { return levels.empty() ? 0 : static_cast<int>(levels.front().features.size(1)); }
  int num_levels() const { return static_cast<int>(levels.size()); }
};

/// level = clamp(floor(canonical_level + log2(sqrt(area) / canonical_scale)), 0, num_levels - 1)
int assign_pyramid_level(const Box& box, int num_levels, double canonical_scale = 56.0, int canonical_level = 1);

}  // namespace maskcraft::scaffold
