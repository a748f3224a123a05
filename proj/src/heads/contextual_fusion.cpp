#include "maskcraft/heads/contextual_fusion.hpp"

#include <string>

#include "maskcraft/errors.hpp"

namespace maskcraft::heads {

ContextualFusionImpl::ContextualFusionImpl(int source_channels, std::vector<int> filters,
                                           scaffold::RoiAlignOptions align)
    : align_(align) {
  if (filters.empty()) throw ConfigError("contextual fusion needs at least one conv");
  int in = source_channels;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    convs_.push_back(register_module("conv" + std::to_string(i),
                                     torch::nn::Conv2d(torch::nn::Conv2dOptions(in, filters[i], 3).padding(1))));
    in = filters[i];
  }
}

torch::Tensor ContextualFusionImpl::descriptor(const FusionContext& ctx) {
  const auto whole = scaffold::boxes_to_tensor({ctx.image_box});
  auto x = scaffold::roi_align(ctx.source, whole, ctx.stride, align_);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = convs_[i]->forward(x);
    if (i + 1 < convs_.size()) x = torch::relu(x);
  }
  return x;
}

torch::Tensor ContextualFusionImpl::forward(const torch::Tensor& roi_features, const FusionContext& ctx) {
  const auto d = descriptor(ctx);
  TORCH_CHECK(d.size(1) == roi_features.size(1), "fusion descriptor width must match the RoI features");
  return roi_features + d;
}

}  // namespace maskcraft::heads
