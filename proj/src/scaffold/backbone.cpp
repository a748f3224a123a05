#include "maskcraft/scaffold/backbone.hpp"

namespace maskcraft::scaffold {

namespace F = torch::nn::functional;

BackboneImpl::BackboneImpl(const BackboneConfig& config) : config_(config) {
  stem_ = register_module(
      "stem", torch::nn::Conv2d(torch::nn::Conv2dOptions(3, config.stem_channels, 3).stride(2).padding(1)));
  int in = config.stem_channels;
  for (int ch : config.stage_channels) {
    torch::nn::Sequential stage(torch::nn::Conv2d(torch::nn::Conv2dOptions(in, ch, 3).stride(2).padding(1)),
                                torch::nn::ReLU(),
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, ch, 3).padding(1)),
                                torch::nn::ReLU());
    stages_->push_back(stage);
    laterals_->push_back(torch::nn::Conv2d(torch::nn::Conv2dOptions(ch, config.pyramid_channels, 1)));
    outputs_->push_back(
        torch::nn::Conv2d(torch::nn::Conv2dOptions(config.pyramid_channels, config.pyramid_channels, 3).padding(1)));
    in = ch;
  }
  register_module("stages", stages_);
  register_module("laterals", laterals_);
  register_module("outputs", outputs_);
}

FeaturePyramid BackboneImpl::forward(const torch::Tensor& image) {
  TORCH_CHECK(image.dim() == 4 && image.size(0) == 1 && image.size(1) == 3, "backbone expects a 1x3xHxW image");
  FeaturePyramid pyramid;
  pyramid.image_height = static_cast<int>(image.size(2));
  pyramid.image_width = static_cast<int>(image.size(3));
  const int64_t pad_h = (kMaxStride - pyramid.image_height % kMaxStride) % kMaxStride;
  const int64_t pad_w = (kMaxStride - pyramid.image_width % kMaxStride) % kMaxStride;
  torch::Tensor x = image;
  if (pad_h || pad_w) x = F::pad(image, F::PadFuncOptions({0, pad_w, 0, pad_h}));

  x = torch::relu(stem_->forward(x));
  std::vector<torch::Tensor> stage_out;
  for (const auto& stage : *stages_) {
    x = stage->as<torch::nn::Sequential>()->forward(x);
    stage_out.push_back(x);
  }

  const std::size_t n = stage_out.size();
  std::vector<torch::Tensor> merged(n);
  merged[n - 1] = laterals_[n - 1]->as<torch::nn::Conv2d>()->forward(stage_out[n - 1]);
  for (std::size_t i = n - 1; i-- > 0;) {
    const auto& lateral = stage_out[i];
    auto up = F::interpolate(merged[i + 1], F::InterpolateFuncOptions()
                                                .size(std::vector<int64_t>{lateral.size(2), lateral.size(3)})
                                                .mode(torch::kNearest));
    merged[i] = laterals_[i]->as<torch::nn::Conv2d>()->forward(lateral) + up;
  }
  int stride = kStemStride;
  for (std::size_t i = 0; i < n; ++i) {
    stride *= 2;
    const int64_t h = (pyramid.image_height + stride - 1) / stride;
    const int64_t w = (pyramid.image_width + stride - 1) / stride;
    auto level = outputs_[i]->as<torch::nn::Conv2d>()->forward(merged[i]);
    if (level.size(2) != h || level.size(3) != w) level = level.slice(2, 0, h).slice(3, 0, w);
    pyramid.levels.push_back({stride, level});
  }
  return pyramid;
}

std::int64_t parameter_count(const torch::nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters()) n += p.numel();
  return n;
}

}  // namespace maskcraft::scaffold
