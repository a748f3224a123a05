#pragma once

#include <vector>

#include <torch/torch.h>

#include "maskcraft/box.hpp"
#include "maskcraft/scaffold/pyramid.hpp"

namespace maskcraft::scaffold {

struct RoiAlignOptions {
  int output_size = 7;
  int sampling_ratio = 2;
  /// Half-pixel correction: feature cell j is centred at (j + 0.5) * stride.
  bool aligned = true;
};

/// Bilinear RoIAlign on one feature map.
///
/// features: C x h x w (or 1 x C x h x w); boxes: N x 4 (x1, y1, x2, y2) in
/// image coordinates, mapped to the map by multiplying with 1 / stride
/// without rounding. Each of the output_size^2 cells averages
/// sampling_ratio^2 bilinear samples. Sample handling at the borders follows
/// the usual convention: samples beyond one pixel outside the map are zero,
/// others are clamped to the map.
///
/// Differentiable with respect to `features`. Throws GeometryError when a box
/// has non-positive width or height.
torch::Tensor roi_align(const torch::Tensor& features, const torch::Tensor& boxes, int stride,
                        const RoiAlignOptions& options);

/// RoIAlign over a pyramid: RoI i is pooled from level `levels[i]`. The output
/// keeps the input RoI order.
torch::Tensor multilevel_roi_align(const FeaturePyramid& pyramid, const torch::Tensor& boxes,
                                   const std::vector<int>& levels, const RoiAlignOptions& options);

torch::Tensor boxes_to_tensor(const std::vector<Box>& boxes);
std::vector<Box> tensor_to_boxes(const torch::Tensor& boxes);

}  // namespace maskcraft::scaffold
