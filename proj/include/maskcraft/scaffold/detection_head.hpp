#pragma once

#include <torch/torch.h>

namespace maskcraft::scaffold {

struct DetectionOutputs {
  torch::Tensor class_logits;  // N x (K + 1), column 0 is background
  torch::Tensor box_deltas;    // N x K x 4
};

/// Two fully connected layers, then parallel class and box linear heads.
class DetectionHeadImpl : public torch::nn::Module {
 public:
  DetectionHeadImpl(int in_channels, int roi_size, int fc_dim, int num_classes);

  DetectionOutputs forward(const torch::Tensor& roi_features);

  torch::nn::Linear fc1{nullptr}, fc2{nullptr}, cls_score{nullptr}, bbox_pred{nullptr};

 private:
  int in_features_;
  int num_classes_;
};
TORCH_MODULE(DetectionHead);

}  // namespace maskcraft::scaffold
