#pragma once

#include <map>
#include <vector>

#include <torch/torch.h>

#include "maskcraft/config.hpp"
#include "maskcraft/scaffold/mask_head.hpp"

namespace maskcraft::heads {

/// Auxiliary mask branches supervised at other resolutions. Each branch is a
/// copy of the baseline layer sequence with its own parameters: the 0.5x
/// branch drops the deconv (14x14 output), the 2x branch appends a second
/// deconv (56x56 output). They only feed the loss.
class QuasiMultitaskImpl : public torch::nn::Module {
 public:
  QuasiMultitaskImpl(int in_channels, const MaskHeadConfig& head, int num_classes, const std::vector<double>& scales);

  /// scale -> N x K x (s * scale) x (s * scale) logits.
  std::map<double, torch::Tensor> forward(const torch::Tensor& roi_features);

  const std::vector<double>& scales() const { return scales_; }

  /// Number of stride-2 deconvs in the branch for `scale`.
  static int upsamples_for(double scale);

 private:
  std::vector<double> scales_;
  std::map<double, scaffold::BaselineMaskHead> branches_;
};
TORCH_MODULE(QuasiMultitask);

}  // namespace maskcraft::heads
