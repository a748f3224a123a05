#pragma once

#include <array>
#include <vector>

#include <torch/torch.h>

#include "maskcraft/box.hpp"

namespace maskcraft::scaffold {

/// (dx, dy, dw, dh) box regression with per-coordinate weights.
struct BoxCoder {
  std::array<double, 4> weights{10.0, 10.0, 5.0, 5.0};

  /// reference, target: N x 4 corner boxes -> N x 4 deltas.
  torch::Tensor encode(const torch::Tensor& reference, const torch::Tensor& target) const;
  /// reference: N x 4, deltas: N x 4 -> N x 4 boxes. dw/dh are clamped.
  torch::Tensor decode(const torch::Tensor& reference, const torch::Tensor& deltas) const;
};

/// Greedy non-maximum suppression. Returns kept indices in descending score
/// order; ties keep the lower index first.
std::vector<int> nms(const std::vector<Box>& boxes, const std::vector<float>& scores, double iou_threshold);

}  // namespace maskcraft::scaffold
