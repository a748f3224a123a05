#pragma once

#include <torch/torch.h>

#include "maskcraft/heads/head_config.hpp"

namespace maskcraft::heads {

/// Single residual block: x + conv(relu(conv(x))), both 3x3 with F channels.
class ResidualRefinementImpl : public torch::nn::Module {
 public:
  explicit ResidualRefinementImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);
  torch::nn::Conv2d& final_conv() { return conv2_; }

 private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(ResidualRefinement);

/// Densely connected refinement stack.
///
/// Module i (0-based) sees the concatenation of the input and the outputs of
/// modules 0..i-1, i.e. channels + outer_filters * i, and runs
/// BN, PReLU, 3x3 conv (inner_filters), BN, PReLU, 3x3 conv (outer_filters).
/// A 1x1 conv projects the final concatenation (channels + outer * n) back
/// to `channels` and the result is added to the input.
class DenseRefinementImpl : public torch::nn::Module {
 public:
  DenseRefinementImpl(int channels, int num_modules, int inner_filters, int outer_filters);
  torch::Tensor forward(const torch::Tensor& x);

  /// Input width of module i, 0-based.
  int module_input_channels(int i) const { return channels_ + outer_ * i; }
  int concat_channels() const { return channels_ + outer_ * num_modules_; }
  torch::nn::Conv2d& final_conv() { return projection_; }

 private:
  int channels_;
  int num_modules_;
  int outer_;
  std::vector<torch::nn::Sequential> modules_;
  torch::nn::Conv2d projection_{nullptr};
};
TORCH_MODULE(DenseRefinement);

}  // namespace maskcraft::heads
