#include "maskcraft/heads/mask_head.hpp"

#include "maskcraft/errors.hpp"
#include "maskcraft/scaffold/backbone.hpp"

namespace maskcraft::heads {

MaskHeadImpl::MaskHeadImpl(const HeadConfig& config, int roi_channels, const MaskHeadConfig& head, int num_classes,
                           scaffold::RoiAlignOptions fusion_align)
    : config_(config) {
  config.validate(roi_channels);
  if (config.contextual_fusion.enabled) {
    fusion_ = register_module("contextual_fusion",
                              ContextualFusion(roi_channels, config.contextual_fusion.conv_filters, fusion_align));
  }
  if (config.deconv_pyramid.enabled) {
    pyramid_ = register_module("deconv_pyramid",
                               DeconvPyramid(config.deconv_pyramid.channels, config.deconv_pyramid.depth, head.activation));
  }
  baseline_ = register_module("baseline", scaffold::BaselineMaskHead(roi_channels, head, num_classes));
  switch (config.boundary_refinement.mode) {
    case BoundaryMode::kOff:
      break;
    case BoundaryMode::kOriginal:
      residual_ = register_module("boundary_refinement", ResidualRefinement(head.channels));
      break;
    case BoundaryMode::kImproved: {
      const auto& b = config.boundary_refinement;
      dense_ = register_module("boundary_refinement",
                               DenseRefinement(head.channels, b.num_dense_modules, b.inner_filters, b.outer_filters));
      break;
    }
  }
  if (!config.quasi_multitask.scales.empty()) {
    aux_ = register_module("quasi_multitask",
                           QuasiMultitask(roi_channels, head, num_classes, config.quasi_multitask.scales));
  }
}

torch::Tensor MaskHeadImpl::fused(const torch::Tensor& roi_features, const FusionContext* fusion) {
  if (!fusion_) return roi_features;
  if (fusion == nullptr) throw ArgumentError("contextual fusion is enabled but no fusion context was given");
  return fusion_->forward(roi_features, *fusion);
}

MaskHeadOutput MaskHeadImpl::forward(const torch::Tensor& roi_features, const FusionContext* fusion, bool with_aux) {
  const auto x = fused(roi_features, fusion);
  auto y = pyramid_ ? pyramid_->forward(x) : x;
  y = baseline_->upsample(baseline_->trunk(y));
  if (residual_) y = residual_->forward(y);
  if (dense_) y = dense_->forward(y);
  MaskHeadOutput out{baseline_->predict(y), {}};
  if (with_aux && aux_) out.aux = aux_->forward(x);
  return out;
}

std::int64_t MaskHeadImpl::inference_parameter_count() const {
  std::int64_t n = scaffold::parameter_count(*this);
  if (aux_) n -= scaffold::parameter_count(*aux_);
  return n;
}

void MaskHeadImpl::zero_technique_tails() {
  torch::NoGradGuard no_grad;
  auto zero = [](torch::nn::Conv2d& conv) {
    conv->weight.zero_();
    if (conv->bias.defined()) conv->bias.zero_();
  };
  if (fusion_) zero(fusion_->final_conv());
  if (pyramid_) zero(pyramid_->final_conv());
  if (residual_) zero(residual_->final_conv());
  if (dense_) zero(dense_->final_conv());
}

MaskHead build_mask_head(const HeadConfig& config, int roi_channels, const MaskHeadConfig& head, int num_classes,
                         scaffold::RoiAlignOptions fusion_align) {
  config.validate(roi_channels);
  return MaskHead(config, roi_channels, head, num_classes, fusion_align);
}

int copy_matching_state(const torch::nn::Module& src, torch::nn::Module& dst) {
  torch::NoGradGuard no_grad;
  auto dst_params = dst.named_parameters(true);
  auto dst_buffers = dst.named_buffers(true);
  int copied = 0;
  for (const auto& item : src.named_parameters(true)) {
    if (auto* t = dst_params.find(item.key()); t && t->sizes() == item.value().sizes()) {
      t->copy_(item.value());
      ++copied;
    }
  }
  for (const auto& item : src.named_buffers(true)) {
    if (auto* t = dst_buffers.find(item.key()); t && t->sizes() == item.value().sizes()) {
      t->copy_(item.value());
      ++copied;
    }
  }
  return copied;
}

}  // namespace maskcraft::heads
