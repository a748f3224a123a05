#include "maskcraft/scaffold/proposals.hpp"

#include <algorithm>

#include "maskcraft/scaffold/box_ops.hpp"
#include "maskcraft/scaffold/roi_align.hpp"
#include "maskcraft/scaffold/sampler.hpp"

namespace maskcraft::scaffold {

void RoiBatch::push_back(const Box& box, float score) {
  boxes.push_back(box);
  level_index.push_back(0);
  is_foreground.push_back(false);
  matched_gt.push_back(std::nullopt);
  scores.push_back(score);
}

RoiBatch RoiBatch::select(const std::vector<int>& indices) const {
  RoiBatch out;
  for (int i : indices) {
    out.boxes.push_back(boxes[i]);
    out.level_index.push_back(level_index[i]);
    out.is_foreground.push_back(is_foreground[i]);
    out.matched_gt.push_back(matched_gt[i]);
    out.scores.push_back(scores[i]);
  }
  return out;
}

RoiBatch& RoiBatch::append(const RoiBatch& other) {
  boxes.insert(boxes.end(), other.boxes.begin(), other.boxes.end());
  level_index.insert(level_index.end(), other.level_index.begin(), other.level_index.end());
  is_foreground.insert(is_foreground.end(), other.is_foreground.begin(), other.is_foreground.end());
  matched_gt.insert(matched_gt.end(), other.matched_gt.begin(), other.matched_gt.end());
  scores.insert(scores.end(), other.scores.begin(), other.scores.end());
  return *this;
}

Box jitter_box(const Box& box, double jitter, Rng& rng, double image_width, double image_height) {
  if (jitter <= 0.0) return box;
  const double w = box.width(), h = box.height();
  Box out{box.x1 + rng.uniform(-jitter, jitter) * w, box.y1 + rng.uniform(-jitter, jitter) * h,
          box.x2 + rng.uniform(-jitter, jitter) * w, box.y2 + rng.uniform(-jitter, jitter) * h};
  out = clip_box(out, image_width, image_height);
  return out.valid() ? out : box;
}

RoiBatch propose_gt_boxes(const std::vector<Box>& gt, double jitter, Rng& rng, double image_width,
                          double image_height) {
  RoiBatch batch;
  for (const auto& b : gt) batch.push_back(jitter_box(b, jitter, rng, image_width, image_height));
  return batch;
}

void assign_levels(RoiBatch& batch, int num_levels, const RoiConfig& roi) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch.level_index[i] = assign_pyramid_level(batch.boxes[i], num_levels, roi.canonical_scale, roi.canonical_level);
  }
}

torch::Tensor make_anchors(const FeaturePyramid& pyramid, double anchor_scale) {
  std::vector<double> coords;
  for (const auto& level : pyramid.levels) {
    const int64_t h = level.features.size(2), w = level.features.size(3);
    const double side = anchor_scale * level.stride;
    for (int64_t y = 0; y < h; ++y) {
      for (int64_t x = 0; x < w; ++x) {
        const double cx = (x + 0.5) * level.stride, cy = (y + 0.5) * level.stride;
        coords.insert(coords.end(), {cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2});
      }
    }
  }
  return torch::tensor(coords, torch::kDouble).view({-1, 4});
}

ProposalHeadImpl::ProposalHeadImpl(int channels, double anchor_scale) : anchor_scale_(anchor_scale) {
  conv_ = register_module("conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, channels, 3).padding(1)));
  objectness_ = register_module("objectness", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, 1, 1)));
  deltas_ = register_module("deltas", torch::nn::Conv2d(torch::nn::Conv2dOptions(channels, 4, 1)));
}

ProposalOutputs ProposalHeadImpl::forward(const FeaturePyramid& pyramid) {
  std::vector<torch::Tensor> obj, del;
  for (const auto& level : pyramid.levels) {
    const auto t = torch::relu(conv_->forward(level.features));
    obj.push_back(objectness_->forward(t).reshape({-1}));
    del.push_back(deltas_->forward(t).squeeze(0).permute({1, 2, 0}).reshape({-1, 4}));
  }
  return {torch::cat(obj), torch::cat(del), make_anchors(pyramid, anchor_scale_)};
}

RoiBatch select_proposals(const ProposalOutputs& outputs, int image_height, int image_width, int pre_nms_top_k,
                          int top_k, double nms_threshold) {
  torch::NoGradGuard no_grad;
  const auto scores = torch::sigmoid(outputs.objectness.detach().to(torch::kDouble));
  const auto decoded = BoxCoder{}.decode(outputs.anchors, outputs.deltas.detach().to(torch::kDouble));
  const auto boxes = tensor_to_boxes(decoded);
  const auto score_vec = std::vector<double>(scores.data_ptr<double>(), scores.data_ptr<double>() + scores.numel());

  std::vector<Box> cand;
  std::vector<float> cand_scores;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const Box b = clip_box(boxes[i], image_width, image_height);
    if (b.width() < 1.0 || b.height() < 1.0) continue;
    cand.push_back(b);
    cand_scores.push_back(static_cast<float>(score_vec[i]));
  }
  std::vector<int> order(cand.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cand_scores[a] > cand_scores[b]; });
  if (static_cast<int>(order.size()) > pre_nms_top_k) order.resize(pre_nms_top_k);
  std::vector<Box> pre;
  std::vector<float> pre_scores;
  for (int i : order) {
    pre.push_back(cand[i]);
    pre_scores.push_back(cand_scores[i]);
  }
  auto keep = nms(pre, pre_scores, nms_threshold);
  if (static_cast<int>(keep.size()) > top_k) keep.resize(top_k);
  RoiBatch batch;
  for (int i : keep) batch.push_back(pre[i], pre_scores[i]);
  return batch;
}

ProposalLosses proposal_losses(const ProposalOutputs& outputs, const std::vector<Box>& gt, int num_samples, Rng& rng) {
  const auto anchors = tensor_to_boxes(outputs.anchors);
  const int A = static_cast<int>(anchors.size());
  std::vector<int> label(A, -1);  // 1 pos, 0 neg, -1 ignore
  std::vector<int> match(A, -1);
  std::vector<double> best_iou(A, 0.0);
  for (int a = 0; a < A; ++a) {
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = box_iou(anchors[a], gt[g]);
      if (iou > best_iou[a]) {
        best_iou[a] = iou;
        match[a] = static_cast<int>(g);
      }
    }
    if (best_iou[a] >= 0.5) label[a] = 1;
    else if (best_iou[a] < 0.3) label[a] = 0;
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    int best = -1;
    double best_v = 0.0;
    for (int a = 0; a < A; ++a) {
      const double iou = box_iou(anchors[a], gt[g]);
      if (iou > best_v) {
        best_v = iou;
        best = a;
      }
    }
    if (best >= 0) {
      label[best] = 1;
      match[best] = static_cast<int>(g);
    }
  }
  std::vector<int> pos, neg;
  for (int a = 0; a < A; ++a) {
    if (label[a] == 1) pos.push_back(a);
    else if (label[a] == 0) neg.push_back(a);
  }
  pos = random_subset(pos, std::min<std::size_t>(pos.size(), num_samples / 2), rng);
  neg = random_subset(neg, std::min<std::size_t>(neg.size(), num_samples - pos.size()), rng);

  std::vector<int64_t> idx;
  std::vector<float> targets;
  for (int a : pos) {
    idx.push_back(a);
    targets.push_back(1.0f);
  }
  for (int a : neg) {
    idx.push_back(a);
    targets.push_back(0.0f);
  }
  const auto dtype = outputs.objectness.scalar_type();
  if (idx.empty()) {
    const auto zero = outputs.objectness.sum() * 0.0;
    return {zero, outputs.deltas.sum() * 0.0};
  }
  const auto sel = torch::tensor(idx, torch::kLong);
  const auto logits = outputs.objectness.index_select(0, sel);
  const auto obj_loss = torch::binary_cross_entropy_with_logits(logits, torch::tensor(targets).to(dtype));

  torch::Tensor box_loss = outputs.deltas.sum() * 0.0;
  if (!pos.empty()) {
    std::vector<Box> ref, tgt;
    std::vector<int64_t> pidx;
    for (int a : pos) {
      ref.push_back(anchors[a]);
      tgt.push_back(gt[match[a]]);
      pidx.push_back(a);
    }
    const auto target_deltas = BoxCoder{}.encode(boxes_to_tensor(ref), boxes_to_tensor(tgt)).to(dtype);
    const auto pred = outputs.deltas.index_select(0, torch::tensor(pidx, torch::kLong));
    box_loss = torch::nn::functional::smooth_l1_loss(
                   pred, target_deltas, torch::nn::functional::SmoothL1LossFuncOptions().reduction(torch::kSum).beta(1.0 / 9.0)) /
               static_cast<double>(idx.size());
  }
  return {obj_loss, box_loss};
}

}  // namespace maskcraft::scaffold
