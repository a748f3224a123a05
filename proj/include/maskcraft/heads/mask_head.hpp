#pragma once

#include <map>
#include <optional>

#include <torch/torch.h>

#include "maskcraft/config.hpp"
#include "maskcraft/heads/boundary_refinement.hpp"
#include "maskcraft/heads/contextual_fusion.hpp"
#include "maskcraft/heads/deconv_pyramid.hpp"
#include "maskcraft/heads/head_config.hpp"
#include "maskcraft/heads/quasi_multitask.hpp"
#include "maskcraft/scaffold/mask_head.hpp"

namespace maskcraft::heads {

struct MaskHeadOutput {
  torch::Tensor logits;               // N x K x 28 x 28
  std::map<double, torch::Tensor> aux;  // empty unless requested
};

/// Mask branch with every technique as an optional stage:
///
///   RoI features -> [contextual fusion] -+-> [deconv pyramid] -> baseline convs
///                                         |   -> deconv (28x28) -> [boundary refinement] -> 1x1 logits
///                                         +-> [quasi-multitask branches] (loss only)
///
/// With every technique off this is exactly the baseline head: the same
/// parameters under the same names and the same forward function.
class MaskHeadImpl : public torch::nn::Module {
 public:
  MaskHeadImpl(const HeadConfig& config, int roi_channels, const MaskHeadConfig& head, int num_classes,
               scaffold::RoiAlignOptions fusion_align);

  /// `fusion` is required when contextual fusion is enabled. `with_aux` runs
  /// the auxiliary branches; inference leaves it off.
  MaskHeadOutput forward(const torch::Tensor& roi_features, const FusionContext* fusion = nullptr,
                         bool with_aux = false);

  /// RoI features after the (optional) fusion stage.
  torch::Tensor fused(const torch::Tensor& roi_features, const FusionContext* fusion);

  /// Parameters that take part in inference (auxiliary branches excluded).
  std::int64_t inference_parameter_count() const;

  /// Zeroes the final additive/residual projection of every enabled
  /// technique, which makes each of them an identity map.
  void zero_technique_tails();

  const HeadConfig& config() const { return config_; }
  scaffold::BaselineMaskHead& baseline() { return baseline_; }
  ContextualFusion& fusion() { return fusion_; }
  DeconvPyramid& pyramid() { return pyramid_; }
  ResidualRefinement& residual_refinement() { return residual_; }
  DenseRefinement& dense_refinement() { return dense_; }
  QuasiMultitask& quasi_multitask() { return aux_; }

 private:
  HeadConfig config_;
  ContextualFusion fusion_{nullptr};
  DeconvPyramid pyramid_{nullptr};
  scaffold::BaselineMaskHead baseline_{nullptr};
  ResidualRefinement residual_{nullptr};
  DenseRefinement dense_{nullptr};
  QuasiMultitask aux_{nullptr};
};
TORCH_MODULE(MaskHead);

/// Validates the configuration and builds the composed head.
MaskHead build_mask_head(const HeadConfig& config, int roi_channels, const MaskHeadConfig& head, int num_classes,
                         scaffold::RoiAlignOptions fusion_align);

/// Copies every parameter and buffer of `src` whose name exists in `dst`
/// with the same shape. Returns the number of tensors copied.
int copy_matching_state(const torch::nn::Module& src, torch::nn::Module& dst);

}  // namespace maskcraft::heads
