#pragma once

#include <torch/torch.h>

#include "maskcraft/config.hpp"

namespace maskcraft::scaffold {

torch::Tensor activate(const torch::Tensor& x, Activation act);

/// Baseline mask branch: `num_convs` 3x3 convs, `num_upsamples` stride-2
/// 2x2 deconvs (one in the standard head: 14 -> 28), then a 1x1 conv to K
/// class-specific mask logits.
///
/// The forward is split into trunk / upsample / predict so the composed head
/// can insert techniques between the stages.
class BaselineMaskHeadImpl : public torch::nn::Module {
 public:
  BaselineMaskHeadImpl(int in_channels, const MaskHeadConfig& config, int num_classes, int num_upsamples = 1);

  torch::Tensor forward(const torch::Tensor& roi_features);

  torch::Tensor trunk(const torch::Tensor& roi_features);
  torch::Tensor upsample(const torch::Tensor& trunk_features);
  torch::Tensor predict(const torch::Tensor& features);

  int channels() const { return config_.channels; }
  int num_upsamples() const { return num_upsamples_; }

 private:
  MaskHeadConfig config_;
  int num_upsamples_;
  torch::nn::ModuleList convs_;
  torch::nn::ModuleList deconvs_;
  torch::nn::Conv2d predictor_{nullptr};
};
TORCH_MODULE(BaselineMaskHead);

}  // namespace maskcraft::scaffold
