#pragma once

#include <map>
#include <vector>

#include <torch/torch.h>

#include "maskcraft/config.hpp"
#include "maskcraft/data/sample.hpp"
#include "maskcraft/heads/mask_head.hpp"
#include "maskcraft/rng.hpp"
#include "maskcraft/scaffold/backbone.hpp"
#include "maskcraft/scaffold/detection_head.hpp"
#include "maskcraft/scaffold/proposals.hpp"

namespace maskcraft {

/// One output instance.
struct Detection {
  Box box;
  int category_id = 0;
  float score = 0.0f;
  int mask_side = 0;
  std::vector<float> mask_probs;  // mask_side x mask_side, row-major
  data::BinaryMask mask;          // pasted at image resolution
};

/// Unweighted loss terms of one image.
struct RawLosses {
  torch::Tensor l_cls;
  torch::Tensor l_box;
  torch::Tensor l_mask;
  std::map<double, torch::Tensor> aux;
  int num_rois = 0;
  int num_foreground = 0;
};

/// Two-stage detector: backbone + pyramid, proposal source, RoIAlign,
/// detection heads and the composed mask head.
class DetectorImpl : public torch::nn::Module {
 public:
  explicit DetectorImpl(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  RawLosses forward_train(const data::ImageSample& sample, const TrainConfig& train, Rng& rng);

  /// Inference on one image. In gt_boxes mode the sample's annotations supply
  /// the proposals; otherwise they are ignored.
  std::vector<Detection> infer(const data::ImageSample& sample, const EvalConfig& eval);

  /// Whole-image input for contextual fusion.
  heads::FusionContext fusion_context(const scaffold::FeaturePyramid& pyramid) const;

  scaffold::Backbone backbone{nullptr};
  scaffold::ProposalHead proposal_head{nullptr};
  scaffold::DetectionHead det_head{nullptr};
  heads::MaskHead mask_head{nullptr};

 private:
  scaffold::RoiBatch proposals_for(const data::ImageSample& sample, const scaffold::ProposalOutputs* outputs,
                                   bool training, Rng* rng) const;

  ModelConfig config_;
};
TORCH_MODULE(Detector);

/// 1 x 3 x H x W float tensor.
torch::Tensor image_to_tensor(const data::Image& image);

/// Corner boxes of the non-crowd annotations, in order, and their indices.
std::vector<Box> gt_boxes(const data::ImageSample& sample, std::vector<int>* indices = nullptr);

}  // namespace maskcraft
