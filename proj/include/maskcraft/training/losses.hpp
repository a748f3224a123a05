#pragma once

#include <map>
#include <vector>

#include <torch/torch.h>

namespace maskcraft::training {

/// Per-pixel binary cross-entropy on the logit channel of each RoI's class,
/// averaged over RoIs and pixels. logits: N x K x s x s, targets: N x s x s,
/// classes: 1-based category ids. Zero when N == 0.
torch::Tensor mask_loss(const torch::Tensor& logits, const torch::Tensor& targets, const std::vector<int>& classes);

/// Scalar loss terms of one step.
///
/// total = l_cls + l_box + alpha * (l_mask + aux_weight * sum(aux_losses))
struct LossBundle {
  double l_cls = 0.0;
  double l_box = 0.0;
  double l_mask = 0.0;
  std::map<double, double> aux_losses;
  double aux_weight = 1.0;
  double alpha = 1.0;
  double total = 0.0;
};

/// Throws TrainingError if any component is non-finite, ArgumentError if
/// alpha < 1.
LossBundle assemble_loss(double l_cls, double l_box, double l_mask, const std::map<double, double>& aux_losses,
                         double alpha, double aux_weight);

/// Same formula on tensors, for backpropagation.
torch::Tensor assemble_loss_tensor(const torch::Tensor& l_cls, const torch::Tensor& l_box, const torch::Tensor& l_mask,
                                   const std::map<double, torch::Tensor>& aux_losses, double alpha, double aux_weight);

}  // namespace maskcraft::training
