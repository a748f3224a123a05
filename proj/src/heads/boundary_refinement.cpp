#include "maskcraft/heads/boundary_refinement.hpp"

#include <string>

namespace maskcraft::heads {

ResidualRefinementImpl::ResidualRefinementImpl(int channels) {
  conv1_ = register_module("conv1", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  conv2_ = register_module("conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
}

torch::Tensor ResidualRefinementImpl::forward(const torch::Tensor& x) {
  return x + conv2_->forward(torch::relu(conv1_->forward(x)));
}

DenseRefinementImpl::DenseRefinementImpl(int channels, int num_modules, int inner_filters, int outer_filters)
    : channels_(channels), num_modules_(num_modules), outer_(outer_filters) {
  for (int i = 0; i < num_modules; ++i) {
    const int in = module_input_channels(i);
    torch::nn::Sequential block(torch::nn::BatchNorm2d(in), torch::nn::PReLU(),
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(in, inner_filters, 3).padding(1).bias(false)),
                                torch::nn::BatchNorm2d(inner_filters), torch::nn::PReLU(),
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(inner_filters, outer_filters, 3).padding(1)));
    modules_.push_back(register_module("module" + std::to_string(i), block));
  }
  projection_ = register_module("projection",
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(concat_channels(), channels, 1)));
}

torch::Tensor DenseRefinementImpl::forward(const torch::Tensor& x) {
  if (x.size(0) == 0) return x;
  std::vector<torch::Tensor> features{x};
  for (auto& block : modules_) features.push_back(block->forward(torch::cat(features, 1)));
  return x + projection_->forward(torch::cat(features, 1));
}

}  // namespace maskcraft::heads
