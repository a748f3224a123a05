#pragma once

#include <vector>

#include <torch/torch.h>

#include "maskcraft/box.hpp"
#include "maskcraft/scaffold/roi_align.hpp"

namespace maskcraft::heads {

/// Whole-image input for contextual fusion: one pyramid level plus the box
/// covering the full (unpadded) image.
struct FusionContext {
  torch::Tensor source;  // 1 x C x h x w
  int stride = 1;
  Box image_box;
};

/// Pools the whole image once with a dedicated RoIAlign (same output size as
/// the mask branch), runs a stack of 3x3 stride-1 convs (ReLU between them),
/// and adds the resulting single C' x s x s descriptor to every RoI.
class ContextualFusionImpl : public torch::nn::Module {
 public:
  ContextualFusionImpl(int source_channels, std::vector<int> filters, scaffold::RoiAlignOptions align);

  /// 1 x C' x s x s descriptor for one image.
  torch::Tensor descriptor(const FusionContext& ctx);

  /// roi_features + descriptor, broadcast over N.
  torch::Tensor forward(const torch::Tensor& roi_features, const FusionContext& ctx);

  torch::nn::Conv2d& final_conv() { return convs_.back(); }

 private:
  scaffold::RoiAlignOptions align_;
  std::vector<torch::nn::Conv2d> convs_;
};
TORCH_MODULE(ContextualFusion);

}  // namespace maskcraft::heads
