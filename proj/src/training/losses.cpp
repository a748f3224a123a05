#include "maskcraft/training/losses.hpp"

#include <cmath>
#include <string>

#include "maskcraft/errors.hpp"

namespace maskcraft::training {

torch::Tensor mask_loss(const torch::Tensor& logits, const torch::Tensor& targets, const std::vector<int>& classes) {
  const int64_t n = logits.size(0);
  TORCH_CHECK(static_cast<int64_t>(classes.size()) == n, "one class per RoI");
  if (n == 0) return logits.sum() * 0.0;
  const int64_t s = logits.size(2);
  std::vector<int64_t> channel(classes.begin(), classes.end());
  for (auto& c : channel) {
    TORCH_CHECK(c >= 1 && c <= logits.size(1), "class id out of range");
    c -= 1;
  }
  const auto index = torch::tensor(channel, torch::kLong).to(logits.device()).view({n, 1, 1, 1}).expand({n, 1, s, s});
  const auto selected = logits.gather(1, index).squeeze(1);
  return torch::binary_cross_entropy_with_logits(selected, targets.to(logits.dtype()));
}

LossBundle assemble_loss(double l_cls, double l_box, double l_mask, const std::map<double, double>& aux_losses,
                         double alpha, double aux_weight) {
  if (!(alpha >= 1.0)) throw ArgumentError("alpha must be >= 1");
  auto check = [](double v, const std::string& name) {
    if (!std::isfinite(v)) throw TrainingError("non-finite loss component " + name);
  };
  check(l_cls, "l_cls");
  check(l_box, "l_box");
  check(l_mask, "l_mask");
  double aux_sum = 0.0;
  for (const auto& [scale, v] : aux_losses) {
    check(v, "aux@" + std::to_string(scale));
    aux_sum += v;
  }
  LossBundle b{l_cls, l_box, l_mask, aux_losses, aux_weight, alpha, 0.0};
  b.total = l_cls + l_box + alpha * (l_mask + aux_weight * aux_sum);
  check(b.total, "total");
  return b;
}

torch::Tensor assemble_loss_tensor(const torch::Tensor& l_cls, const torch::Tensor& l_box, const torch::Tensor& l_mask,
                                   const std::map<double, torch::Tensor>& aux_losses, double alpha, double aux_weight) {
  auto mask_side = l_mask;
  for (const auto& [scale, v] : aux_losses) mask_side = mask_side + aux_weight * v;
  return l_cls + l_box + alpha * mask_side;
}

}  // namespace maskcraft::training
