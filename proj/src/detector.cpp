#include "maskcraft/detector.hpp"

#include <algorithm>
#include <numeric>

#include "maskcraft/data/mask_target.hpp"
#include "maskcraft/errors.hpp"
#include "maskcraft/scaffold/box_ops.hpp"
#include "maskcraft/scaffold/paste.hpp"
#include "maskcraft/scaffold/roi_align.hpp"
#include "maskcraft/scaffold/sampler.hpp"
#include "maskcraft/training/losses.hpp"

namespace maskcraft {

namespace F = torch::nn::functional;

torch::Tensor image_to_tensor(const data::Image& image) {
  auto t = torch::from_blob(const_cast<float*>(image.pixels.data()), {image.height, image.width, 3}, torch::kFloat)
               .clone();
  return (t.permute({2, 0, 1}).unsqueeze(0) - 0.5f).contiguous();
}

std::vector<Box> gt_boxes(const data::ImageSample& sample, std::vector<int>* indices) {
  std::vector<Box> out;
  if (indices) indices->clear();
  for (std::size_t i = 0; i < sample.annotations.size(); ++i) {
    const auto& a = sample.annotations[i];
    if (a.iscrowd) continue;
    out.push_back(a.bbox.to_corners());
    if (indices) indices->push_back(static_cast<int>(i));
  }
  return out;
}

DetectorImpl::DetectorImpl(const ModelConfig& config) : config_(config) {
  config.validate();
  const int C = config.backbone.pyramid_channels;
  backbone = register_module("backbone", scaffold::Backbone(config.backbone));
  if (config.proposals.mode == ProposalMode::kLearned) {
    proposal_head = register_module("proposal_head", scaffold::ProposalHead(C, config.proposals.anchor_scale));
  }
  det_head = register_module("det_head",
                             scaffold::DetectionHead(C, config.roi.det_size, config.det_head.fc_dim, config.num_classes));
  const scaffold::RoiAlignOptions mask_align{config.roi.mask_size, config.roi.sampling_ratio, config.roi.aligned};
  mask_head = register_module(
      "mask_head", heads::build_mask_head(config.heads, C, config.mask_head, config.num_classes, mask_align));
}

heads::FusionContext DetectorImpl::fusion_context(const scaffold::FeaturePyramid& pyramid) const {
  const auto& level = config_.heads.contextual_fusion.source == heads::FusionSource::kFinest ? pyramid.levels.front()
                                                                                              : pyramid.levels.back();
  return {level.features, level.stride,
          Box{0.0, 0.0, static_cast<double>(pyramid.image_width), static_cast<double>(pyramid.image_height)}};
}

scaffold::RoiBatch DetectorImpl::proposals_for(const data::ImageSample& sample,
                                               const scaffold::ProposalOutputs* outputs, bool training,
                                               Rng* rng) const {
  const double W = sample.image.width, H = sample.image.height;
  const auto gts = gt_boxes(sample);
  scaffold::RoiBatch batch;
  if (config_.proposals.mode == ProposalMode::kGtBoxes) {
    if (training) {
      batch = scaffold::propose_gt_boxes(gts, config_.proposals.jitter, *rng, W, H);
    } else {
      Rng unused(0);
      batch = scaffold::propose_gt_boxes(gts, 0.0, unused, W, H);
    }
  } else {
    batch = scaffold::select_proposals(*outputs, sample.image.height, sample.image.width,
                                       config_.proposals.pre_nms_top_k, config_.proposals.top_k,
                                       config_.proposals.nms_threshold);
    if (training) {
      for (const auto& b : gts) batch.push_back(b);
    }
  }
  return batch;
}

RawLosses DetectorImpl::forward_train(const data::ImageSample& sample, const TrainConfig& train, Rng& rng) {
  const auto pyramid = backbone->forward(image_to_tensor(sample.image).to(backbone->parameters().front().scalar_type()));
  std::vector<int> gt_index;
  const auto gts = gt_boxes(sample, &gt_index);

  RawLosses losses;
  auto zero = pyramid.levels.front().features.sum() * 0.0;
  losses.l_box = zero;
  losses.l_mask = zero;

  scaffold::ProposalOutputs outputs;
  if (proposal_head) {
    outputs = proposal_head->forward(pyramid);
    const auto rpn = scaffold::proposal_losses(outputs, gts, config_.proposals.train_anchors, rng);
    losses.l_box = losses.l_box + rpn.objectness + rpn.box;
  }
  auto proposals = proposals_for(sample, proposal_head ? &outputs : nullptr, true, &rng);
  const double W = sample.image.width, H = sample.image.height;
  for (int k = 0; k < train.random_negatives; ++k) {
    const double w = rng.uniform(4.0, std::max(5.0, W / 2)), h = rng.uniform(4.0, std::max(5.0, H / 2));
    const double x = rng.uniform(0.0, std::max(0.0, W - w)), y = rng.uniform(0.0, std::max(0.0, H - h));
    proposals.push_back(clip_box({x, y, x + w, y + h}, W, H), 0.0f);
  }

  auto sampled = scaffold::sample_rois(
      proposals, gts, {train.rois_per_image, train.pos_fraction, train.fg_iou_threshold}, rng);
  losses.num_rois = static_cast<int>(sampled.size());
  if (sampled.empty()) {
    losses.l_cls = zero;
    return losses;
  }
  scaffold::assign_levels(sampled, pyramid.num_levels(), config_.roi);
  const auto roi_boxes = scaffold::boxes_to_tensor(sampled.boxes);
  const auto det_feats = scaffold::multilevel_roi_align(
      pyramid, roi_boxes, sampled.level_index, {config_.roi.det_size, config_.roi.sampling_ratio, config_.roi.aligned});
  const auto det = det_head->forward(det_feats);

  std::vector<int64_t> labels(sampled.size(), 0);
  std::vector<int64_t> fg_rows;
  std::vector<int> fg_classes;
  std::vector<Box> fg_boxes, fg_targets;
  std::vector<const data::InstanceAnnotation*> fg_anns;
  std::vector<int> fg_levels;
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    if (!sampled.is_foreground[i]) continue;
    const auto& ann = sample.annotations[gt_index[*sampled.matched_gt[i]]];
    labels[i] = ann.category_id;
    fg_rows.push_back(static_cast<int64_t>(i));
    fg_classes.push_back(ann.category_id);
    fg_boxes.push_back(sampled.boxes[i]);
    fg_targets.push_back(gts[*sampled.matched_gt[i]]);
    fg_anns.push_back(&ann);
    fg_levels.push_back(sampled.level_index[i]);
  }
  losses.num_foreground = static_cast<int>(fg_rows.size());
  losses.l_cls = F::cross_entropy(det.class_logits, torch::tensor(labels, torch::kLong));
  if (fg_rows.empty()) return losses;

  const auto rows = torch::tensor(fg_rows, torch::kLong);
  std::vector<int64_t> cls_idx;
  for (int c : fg_classes) cls_idx.push_back(c - 1);
  const auto fg_deltas = det.box_deltas.index_select(0, rows)
                             .gather(1, torch::tensor(cls_idx, torch::kLong).view({-1, 1, 1}).expand({-1, 1, 4}))
                             .squeeze(1);
  const auto fg_box_tensor = scaffold::boxes_to_tensor(fg_boxes);
  const auto box_targets =
      scaffold::BoxCoder{}.encode(fg_box_tensor, scaffold::boxes_to_tensor(fg_targets)).to(fg_deltas.dtype());
  losses.l_box = losses.l_box + F::smooth_l1_loss(fg_deltas, box_targets,
                                                  F::SmoothL1LossFuncOptions().reduction(torch::kSum).beta(1.0)) /
                                    static_cast<double>(sampled.size());

  const auto mask_feats = scaffold::multilevel_roi_align(
      pyramid, fg_box_tensor, fg_levels, {config_.roi.mask_size, config_.roi.sampling_ratio, config_.roi.aligned});
  const auto ctx = fusion_context(pyramid);
  const auto out = mask_head->forward(mask_feats, &ctx, true);

  auto targets_at = [&](int64_t side) {
    std::vector<float> flat;
    flat.reserve(fg_anns.size() * side * side);
    for (std::size_t i = 0; i < fg_anns.size(); ++i) {
      const auto t = data::make_mask_target(*fg_anns[i], fg_boxes[i], static_cast<int>(side));
      flat.insert(flat.end(), t.values.begin(), t.values.end());
    }
    return torch::tensor(flat).view({static_cast<int64_t>(fg_anns.size()), side, side});
  };
  losses.l_mask = training::mask_loss(out.logits, targets_at(out.logits.size(2)), fg_classes);
  for (const auto& [scale, logits] : out.aux) {
    losses.aux.emplace(scale, training::mask_loss(logits, targets_at(logits.size(2)), fg_classes));
  }
  return losses;
}

std::vector<Detection> DetectorImpl::infer(const data::ImageSample& sample, const EvalConfig& eval) {
  torch::NoGradGuard no_grad;
  const auto pyramid = backbone->forward(image_to_tensor(sample.image).to(backbone->parameters().front().scalar_type()));
  scaffold::ProposalOutputs outputs;
  if (proposal_head) outputs = proposal_head->forward(pyramid);
  auto proposals = proposals_for(sample, proposal_head ? &outputs : nullptr, false, nullptr);
  if (proposals.empty()) return {};
  scaffold::assign_levels(proposals, pyramid.num_levels(), config_.roi);
  const auto roi_boxes = scaffold::boxes_to_tensor(proposals.boxes);
  const auto det = det_head->forward(scaffold::multilevel_roi_align(
      pyramid, roi_boxes, proposals.level_index,
      {config_.roi.det_size, config_.roi.sampling_ratio, config_.roi.aligned}));
  const auto probs = torch::softmax(det.class_logits.to(torch::kDouble), 1).contiguous();
  const auto deltas = det.box_deltas.to(torch::kDouble);
  const double W = sample.image.width, H = sample.image.height;
  const int K = config_.num_classes;

  std::vector<Detection> all;
  for (int k = 1; k <= K; ++k) {
    const auto decoded = scaffold::tensor_to_boxes(scaffold::BoxCoder{}.decode(roi_boxes, deltas.select(1, k - 1)));
    std::vector<Box> boxes;
    std::vector<float> scores;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
      const double score = probs[static_cast<int64_t>(i)][k].item<double>();
      const Box b = clip_box(decoded[i], W, H);
      if (score <= eval.score_threshold || b.width() < 1e-3 || b.height() < 1e-3) continue;
      boxes.push_back(b);
      scores.push_back(static_cast<float>(score));
    }
    for (int i : scaffold::nms(boxes, scores, eval.nms_threshold)) {
      Detection d;
      d.box = boxes[i];
      d.category_id = k;
      d.score = scores[i];
      all.push_back(std::move(d));
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (static_cast<int>(all.size()) > eval.max_detections) all.resize(eval.max_detections);
  if (all.empty()) return all;

  std::vector<Box> det_boxes;
  std::vector<int> levels;
  for (const auto& d : all) {
    det_boxes.push_back(d.box);
    levels.push_back(scaffold::assign_pyramid_level(d.box, pyramid.num_levels(), config_.roi.canonical_scale,
                                                    config_.roi.canonical_level));
  }
  const auto mask_feats = scaffold::multilevel_roi_align(
      pyramid, scaffold::boxes_to_tensor(det_boxes), levels,
      {config_.roi.mask_size, config_.roi.sampling_ratio, config_.roi.aligned});
  const auto ctx = fusion_context(pyramid);
  const auto logits = mask_head->forward(mask_feats, &ctx, false).logits;
  const auto mask_probs = torch::sigmoid(logits).to(torch::kFloat).contiguous();
  const int side = static_cast<int>(logits.size(2));
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& d = all[i];
    const auto p = mask_probs[static_cast<int64_t>(i)][d.category_id - 1].contiguous();
    d.mask_side = side;
    d.mask_probs.assign(p.data_ptr<float>(), p.data_ptr<float>() + p.numel());
    d.mask = scaffold::paste_mask(d.mask_probs, side, d.box, sample.image.height, sample.image.width,
                                  eval.mask_threshold);
  }
  return all;
}

}  // namespace maskcraft
