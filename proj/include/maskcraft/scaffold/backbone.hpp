#pragma once

#include <torch/torch.h>

#include "maskcraft/config.hpp"
#include "maskcraft/scaffold/pyramid.hpp"

namespace maskcraft::scaffold {

/// Small conv backbone with a top-down feature pyramid.
///
/// stem: 3x3/2 conv. Four stages, each a 3x3/2 conv followed by a 3x3/1 conv
/// (ReLU after every conv), giving strides 4, 8, 16, 32. Each stage feeds a
/// 1x1 lateral to `pyramid_channels`; coarser levels are upsampled (nearest)
/// and added, then a 3x3 output conv produces the level.
class BackboneImpl : public torch::nn::Module {
 public:
  explicit BackboneImpl(const BackboneConfig& config);

  /// image: 1 x 3 x H x W. Zero-pads the bottom/right edge to a multiple of 32
  /// and crops each level back to ceil(H / stride) x ceil(W / stride).
  FeaturePyramid forward(const torch::Tensor& image);

  static constexpr int kMaxStride = 32;
  static constexpr int kStemStride = 2;

 private:
  BackboneConfig config_;
  torch::nn::Conv2d stem_{nullptr};
  torch::nn::ModuleList stages_;
  torch::nn::ModuleList laterals_;
  torch::nn::ModuleList outputs_;
};
TORCH_MODULE(Backbone);

/// Parameter count of a module tree.
std::int64_t parameter_count(const torch::nn::Module& module);

}  // namespace maskcraft::scaffold
