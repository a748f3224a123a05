#pragma once

// Gradient of the assembled loss under two mask-loss weights at fixed weights,
// in double precision.

#include <algorithm>
#include <cmath>
#include <string>

#include "maskcraft/data/shapes_dataset.hpp"
#include "maskcraft/detector.hpp"
#include "maskcraft/training/losses.hpp"
#include "support/invariance.hpp"

namespace alpha_check {

using namespace maskcraft;

struct Outcome {
  double mask_rel_error = 0.0;   // max over mask-head tensors of |g_c - c g_1| / |c g_1|
  double mask_grad_norm = 0.0;
  double det_abs_diff = 0.0;     // max |g_c - g_1| over detection-head parameters
  int mask_tensors = 0;
  int det_tensors = 0;
  std::string worst;
};

inline Outcome run(double c, std::uint64_t seed = 3) {
  torch::manual_seed(seed);
  auto model_cfg = invariance::with_heads(invariance::all_on());
  Detector model(model_cfg);
  model->to(torch::kDouble);
  model->train();
  const auto samples = data::generate_shapes_dataset(seed, 1, 64, 4);
  Rng rng(seed);
  const auto raw = model->forward_train(samples[0], TrainConfig{}, rng);

  std::vector<std::string> names;
  std::vector<torch::Tensor> params;
  for (const auto& p : model->named_parameters()) {
    if (p.key().starts_with("mask_head.") || p.key().starts_with("det_head.")) {
      names.push_back(p.key());
      params.push_back(p.value());
    }
  }
  auto grads = [&](double alpha) {
    const auto total = training::assemble_loss_tensor(raw.l_cls, raw.l_box, raw.l_mask, raw.aux, alpha, 1.0);
    return torch::autograd::grad({total}, params, {}, true, false, true);
  };
  const auto g1 = grads(1.0);
  const auto gc = grads(c);

  auto grad_or_zero = [&](const torch::autograd::variable_list& g, std::size_t i) {
    return g[i].defined() ? g[i] : torch::zeros_like(params[i]);
  };
  // Tensors whose gradient vanishes structurally (a conv bias feeding BN) are
  // compared against a floor tied to the whole mask-branch gradient.
  double mask_norm_sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (names[i].starts_with("mask_head.")) mask_norm_sq += grad_or_zero(g1, i).square().sum().item<double>();
  }
  const double floor = 1e-6 * c * std::sqrt(mask_norm_sq);

  Outcome o;
  o.mask_grad_norm = std::sqrt(mask_norm_sq);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto a = grad_or_zero(g1, i);
    const auto b = grad_or_zero(gc, i);
    if (names[i].starts_with("mask_head.")) {
      const double denom = std::max((c * a).norm().item<double>(), floor);
      const double rel = (b - c * a).norm().item<double>() / denom;
      ++o.mask_tensors;
      if (rel > o.mask_rel_error) {
        o.mask_rel_error = rel;
        o.worst = names[i];
      }
    } else {
      ++o.det_tensors;
      o.det_abs_diff = std::max(o.det_abs_diff, (b - a).abs().max().item<double>());
    }
  }
  return o;
}

}  // namespace alpha_check
