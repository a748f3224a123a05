#include "maskcraft/heads/deconv_pyramid.hpp"

#include <string>

#include "maskcraft/errors.hpp"
#include "maskcraft/scaffold/mask_head.hpp"

namespace maskcraft::heads {

DeconvPyramidImpl::DeconvPyramidImpl(int channels, int depth, Activation activation) : activation_(activation) {
  if (depth < 1) throw ConfigError("deconv pyramid depth must be >= 1");
  for (int i = 0; i < depth; ++i) {
    ups_.push_back(register_module(
        "up" + std::to_string(i),
        torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(channels, channels, 2).stride(2))));
  }
  for (int i = 0; i < depth; ++i) {
    downs_.push_back(register_module(
        "down" + std::to_string(i),
        torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).stride(2).padding(1))));
  }
}

std::vector<torch::Tensor> DeconvPyramidImpl::up_path(const torch::Tensor& x) {
  std::vector<torch::Tensor> path{x};
  for (auto& up : ups_) path.push_back(scaffold::activate(up->forward(path.back()), activation_));
  return path;
}

torch::Tensor DeconvPyramidImpl::forward(const torch::Tensor& x) {
  const auto ups = up_path(x);
  auto d = ups.back();
  for (std::size_t i = downs_.size(); i-- > 0;) {
    d = scaffold::activate(downs_[i]->forward(d), activation_) + ups[i];
  }
  return d;
}

}  // namespace maskcraft::heads
