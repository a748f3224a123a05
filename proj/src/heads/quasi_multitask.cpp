#include "maskcraft/heads/quasi_multitask.hpp"

#include <algorithm>

#include "maskcraft/errors.hpp"

namespace maskcraft::heads {

int QuasiMultitaskImpl::upsamples_for(double scale) {
  if (scale == 0.5) return 0;
  if (scale == 2.0) return 2;
  throw ConfigError("quasi-multitask scale must be 0.5 or 2.0");
}

QuasiMultitaskImpl::QuasiMultitaskImpl(int in_channels, const MaskHeadConfig& head, int num_classes,
                                       const std::vector<double>& scales)
    : scales_(scales) {
  std::ranges::sort(scales_);
  for (double s : scales_) {
    const auto name = s == 0.5 ? "half" : "double";
    branches_.emplace(s, register_module(name, scaffold::BaselineMaskHead(in_channels, head, num_classes,
                                                                          upsamples_for(s))));
  }
}

std::map<double, torch::Tensor> QuasiMultitaskImpl::forward(const torch::Tensor& roi_features) {
  std::map<double, torch::Tensor> out;
  for (auto& [scale, branch] : branches_) out.emplace(scale, branch->forward(roi_features));
  return out;
}

}  // namespace maskcraft::heads
