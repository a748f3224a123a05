#pragma once

#include <optional>
#include <vector>

#include <torch/torch.h>

#include "maskcraft/box.hpp"
#include "maskcraft/config.hpp"
#include "maskcraft/rng.hpp"
#include "maskcraft/scaffold/pyramid.hpp"

namespace maskcraft::scaffold {

/// Proposal boxes with their pyramid level and (after sampling) labels.
struct RoiBatch {
  std::vector<Box> boxes;
  std::vector<int> level_index;
  std::vector<bool> is_foreground;
  std::vector<std::optional<int>> matched_gt;  // index into the gt list
  std::vector<float> scores;

  std::size_t size() const { return boxes.size(); }
  bool empty() const { return boxes.empty(); }
  void push_back(const Box& box, float score = 1.0f);
  /// Keeps entry i for every i in `indices`, in that order.
  RoiBatch select(const std::vector<int>& indices) const;
  RoiBatch& append(const RoiBatch& other);
};

/// Largest edge jitter for which every jittered box keeps IoU > 0.5 with its
/// source: the worst case shrinks all four edges, IoU = (1 - 2*jitter)^2.
inline const double kSafeJitterBound = (1.0 - 0.70710678118654752440) / 2.0;

/// Moves each edge of each box by an independent uniform offset in
/// [-jitter, jitter] times the box side, then clips to the image. A box that
/// would degenerate is kept unjittered.
Box jitter_box(const Box& box, double jitter, Rng& rng, double image_width, double image_height);

/// Proposals equal to the ground-truth boxes (optionally jittered).
RoiBatch propose_gt_boxes(const std::vector<Box>& gt, double jitter, Rng& rng, double image_width,
                          double image_height);

/// Fills `level_index` for every box.
void assign_levels(RoiBatch& batch, int num_levels, const RoiConfig& roi);

/// Raw outputs of the learned proposal head over all levels, concatenated.
struct ProposalOutputs {
  torch::Tensor objectness;  // A
  torch::Tensor deltas;      // A x 4
  torch::Tensor anchors;     // A x 4 (double, no grad)
};

/// One square anchor per location and level, side anchor_scale * stride.
torch::Tensor make_anchors(const FeaturePyramid& pyramid, double anchor_scale);

/// Shared 3x3 conv followed by 1x1 objectness and 1x1 box-regression
/// outputs, applied to every pyramid level.
class ProposalHeadImpl : public torch::nn::Module {
 public:
  ProposalHeadImpl(int channels, double anchor_scale);
  ProposalOutputs forward(const FeaturePyramid& pyramid);

 private:
  double anchor_scale_;
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::Conv2d objectness_{nullptr};
  torch::nn::Conv2d deltas_{nullptr};
};
TORCH_MODULE(ProposalHead);

/// Decodes, clips, keeps the best `pre_nms_top_k`, applies class-agnostic NMS
/// and returns at most `top_k` boxes sorted by score.
RoiBatch select_proposals(const ProposalOutputs& outputs, int image_height, int image_width, int pre_nms_top_k,
                          int top_k, double nms_threshold);

struct ProposalLosses {
  torch::Tensor objectness;
  torch::Tensor box;
};

/// Objectness BCE and smooth-L1 regression over sampled anchors. Anchors with
/// IoU >= 0.5 to a gt (or the best anchor of a gt) are positive, IoU < 0.3
/// negative, the rest ignored.
ProposalLosses proposal_losses(const ProposalOutputs& outputs, const std::vector<Box>& gt, int num_samples, Rng& rng);

}  // namespace maskcraft::scaffold
