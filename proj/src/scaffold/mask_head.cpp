#include "maskcraft/scaffold/mask_head.hpp"

namespace maskcraft::scaffold {

torch::Tensor activate(const torch::Tensor& x, Activation act) {
  return act == Activation::kRelu ? torch::relu(x) : x;
}

BaselineMaskHeadImpl::BaselineMaskHeadImpl(int in_channels, const MaskHeadConfig& config, int num_classes,
                                           int num_upsamples)
    : config_(config), num_upsamples_(num_upsamples) {
  int in = in_channels;
  for (int i = 0; i < config.num_convs; ++i) {
    convs_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, config.channels, 3).padding(1)));
    in = config.channels;
  }
  for (int i = 0; i < num_upsamples; ++i) {
    deconvs_->push_back(torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(in, config.channels, 2).stride(2)));
    in = config.channels;
  }
  register_module("convs", convs_);
  register_module("deconvs", deconvs_);
  predictor_ = register_module("predictor", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, num_classes, 1)));
}

torch::Tensor BaselineMaskHeadImpl::trunk(const torch::Tensor& roi_features) {
  auto x = roi_features;
  for (const auto& conv : *convs_) x = activate(conv->as<torch::nn::Conv2d>()->forward(x), config_.activation);
  return x;
}

torch::Tensor BaselineMaskHeadImpl::upsample(const torch::Tensor& trunk_features) {
  auto x = trunk_features;
  for (const auto& deconv : *deconvs_) {
    x = activate(deconv->as<torch::nn::ConvTranspose2d>()->forward(x), config_.activation);
  }
  return x;
}

torch::Tensor BaselineMaskHeadImpl::predict(const torch::Tensor& features) { return predictor_->forward(features); }

torch::Tensor BaselineMaskHeadImpl::forward(const torch::Tensor& roi_features) {
  return predict(upsample(trunk(roi_features)));
}

}  // namespace maskcraft::scaffold
