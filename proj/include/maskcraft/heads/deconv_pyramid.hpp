#pragma once

#include <torch/torch.h>

#include "maskcraft/config.hpp"

namespace maskcraft::heads {

/// Upsample-then-downsample module with additive laterals.
///
/// u0 = x, u(i+1) = act(deconv_i(u(i))) doubling the size each time;
/// d(depth) = u(depth), d(i) = act(down_i(d(i+1))) + u(i) with stride-2 3x3
/// convs. Returns d0, which has the input's shape.
class DeconvPyramidImpl : public torch::nn::Module {
 public:
  DeconvPyramidImpl(int channels, int depth, Activation activation = Activation::kRelu);

  torch::Tensor forward(const torch::Tensor& x);

  /// Feature maps u(0..depth) of the upsampling path.
  std::vector<torch::Tensor> up_path(const torch::Tensor& x);

  /// The conv producing d0 from d1.
  torch::nn::Conv2d& final_conv() { return downs_.front(); }

 private:
  Activation activation_;
  std::vector<torch::nn::ConvTranspose2d> ups_;
  std::vector<torch::nn::Conv2d> downs_;
};
TORCH_MODULE(DeconvPyramid);

}  // namespace maskcraft::heads
