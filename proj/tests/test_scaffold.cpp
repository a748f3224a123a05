#include <gtest/gtest.h>

#include <cmath>

#include "maskcraft/detector.hpp"
#include "maskcraft/data/shapes_dataset.hpp"
#include "maskcraft/errors.hpp"
#include "maskcraft/scaffold/backbone.hpp"
#include "maskcraft/scaffold/box_ops.hpp"
#include "maskcraft/scaffold/detection_head.hpp"
#include "maskcraft/scaffold/mask_head.hpp"
#include "maskcraft/scaffold/paste.hpp"
#include "maskcraft/scaffold/proposals.hpp"
#include "maskcraft/scaffold/roi_align.hpp"
#include "maskcraft/scaffold/sampler.hpp"

using namespace maskcraft;
using namespace maskcraft::scaffold;

namespace {

// Scalar reference: one bilinear sample with the border rules spelled out.
double sample_at(const std::vector<double>& map, int h, int w, double y, double x) {
  if (y < -1.0 || y > h || x < -1.0 || x > w) return 0.0;
  if (y <= 0) y = 0;
  if (x <= 0) x = 0;
  int y0 = int(y), x0 = int(x), y1, x1;
  if (y0 >= h - 1) {
    y0 = y1 = h - 1;
    y = y0;
  } else {
    y1 = y0 + 1;
  }
  if (x0 >= w - 1) {
    x0 = x1 = w - 1;
    x = x0;
  } else {
    x1 = x0 + 1;
  }
  const double ly = y - y0, lx = x - x0;
  return (1 - ly) * (1 - lx) * map[y0 * w + x0] + (1 - ly) * lx * map[y0 * w + x1] + ly * (1 - lx) * map[y1 * w + x0] +
         ly * lx * map[y1 * w + x1];
}

std::vector<double> roi_align_oracle(const std::vector<double>& map, int h, int w, const Box& b, int stride, int s,
                                     int sr, bool aligned) {
  const double off = aligned ? 0.5 : 0.0;
  const double sx = b.x1 / stride - off, sy = b.y1 / stride - off;
  double rw = b.x2 / stride - off - sx, rh = b.y2 / stride - off - sy;
  if (!aligned) {
    rw = std::max(rw, 1.0);
    rh = std::max(rh, 1.0);
  }
  std::vector<double> out;
  for (int ph = 0; ph < s; ++ph) {
    for (int pw = 0; pw < s; ++pw) {
      double acc = 0;
      for (int iy = 0; iy < sr; ++iy) {
        const double y = sy + ph * rh / s + (iy + 0.5) * rh / s / sr;
        for (int ix = 0; ix < sr; ++ix) {
          const double x = sx + pw * rw / s + (ix + 0.5) * rw / s / sr;
          acc += sample_at(map, h, w, y, x);
        }
      }
      out.push_back(acc / (sr * sr));
    }
  }
  return out;
}

std::vector<double> to_vec(const torch::Tensor& t) {
  const auto c = t.to(torch::kDouble).contiguous();
  return {c.data_ptr<double>(), c.data_ptr<double>() + c.numel()};
}

}  // namespace

TEST(RoiAlign, ConstantMapGivesConstant) {
  const auto f = torch::full({2, 6, 7}, 3.25, torch::kDouble);
  const auto out = roi_align(f, boxes_to_tensor({{1.3, 2.1, 17.9, 20.4}, {0.0, 0.0, 28.0, 24.0}}), 4, {5, 2, true});
  EXPECT_EQ(out.sizes(), (std::vector<int64_t>{2, 2, 5, 5}));
  EXPECT_LT((out - 3.25).abs().max().item<double>(), 1e-12);
}

TEST(RoiAlign, LinearRampCellMeans) {
  auto f = torch::arange(4, torch::kDouble).repeat({4, 1}).unsqueeze(0);  // f(x, y) = x
  const auto out = roi_align(f, boxes_to_tensor({{0, 0, 4, 4}}), 1, {2, 2, true});
  const auto v = to_vec(out);
  // Samples land on x = 0, 1 | 2, 3.
  EXPECT_DOUBLE_EQ(v[0], 0.5);
  EXPECT_DOUBLE_EQ(v[1], 2.5);
  EXPECT_DOUBLE_EQ(v[2], 0.5);
  EXPECT_DOUBLE_EQ(v[3], 2.5);
}

TEST(RoiAlign, FullBoxReproducesMap) {
  const auto f = torch::randn({3, 8, 8}, torch::kDouble);
  const auto out = roi_align(f, boxes_to_tensor({{0, 0, 32, 32}}), 4, {8, 1, true});
  EXPECT_LT((out[0] - f).abs().max().item<double>(), 1e-6);
}

TEST(RoiAlign, MatchesBruteForceOracle) {
  Rng rng(3);
  torch::manual_seed(3);
  int cases = 0;
  for (int k = 0; k < 240; ++k) {
    const int h = int(rng.uniform_int(1, 9)), w = int(rng.uniform_int(1, 9));
    const int stride = std::array<int, 4>{1, 2, 4, 8}[k % 4];
    const int s = int(rng.uniform_int(1, 5)), sr = int(rng.uniform_int(1, 3));
    const bool aligned = k % 3 != 0;
    const auto f = torch::randn({2, h, w}, torch::kDouble);
    std::vector<Box> boxes;
    for (int n = 0; n < 3; ++n) {
      const double x1 = rng.uniform(-0.3 * w * stride, 1.1 * w * stride);
      const double y1 = rng.uniform(-0.3 * h * stride, 1.1 * h * stride);
      boxes.push_back({x1, y1, x1 + rng.uniform(0.2, 1.2 * w * stride), y1 + rng.uniform(0.2, 1.2 * h * stride)});
    }
    const auto out = roi_align(f, boxes_to_tensor(boxes), stride, {s, sr, aligned});
    for (int n = 0; n < 3; ++n) {
      for (int c = 0; c < 2; ++c) {
        const auto expected = roi_align_oracle(to_vec(f[c]), h, w, boxes[n], stride, s, sr, aligned);
        const auto got = to_vec(out[n][c]);
        for (std::size_t i = 0; i < got.size(); ++i) {
          ASSERT_NEAR(got[i], expected[i], 1e-6) << "case " << k << " roi " << n << " channel " << c;
        }
      }
    }
    ++cases;
  }
  EXPECT_GE(cases, 200);
}

TEST(RoiAlign, EmptyAndInvalidBoxes) {
  const auto f = torch::randn({4, 5, 5});
  EXPECT_EQ(roi_align(f, torch::zeros({0, 4}, torch::kDouble), 4, {7, 2, true}).sizes(),
            (std::vector<int64_t>{0, 4, 7, 7}));
  EXPECT_THROW(roi_align(f, boxes_to_tensor({{3, 3, 3, 8}}), 4, {7, 2, true}), GeometryError);
}

TEST(RoiAlign, MultilevelKeepsInputOrder) {
  FeaturePyramid p;
  p.image_height = p.image_width = 64;
  for (int l = 0; l < 4; ++l) {
    const int stride = 4 << l;
    p.levels.push_back({stride, torch::randn({1, 3, 64 / stride, 64 / stride})});
  }
  const std::vector<Box> boxes{{1, 2, 30, 40}, {5, 5, 9, 9}, {0, 0, 64, 64}, {10, 3, 50, 20}};
  const std::vector<int> levels{2, 0, 3, 1};
  const auto t = boxes_to_tensor(boxes);
  const auto out = multilevel_roi_align(p, t, levels, {7, 2, true});
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto one = roi_align(p.levels[levels[i]].features, t.slice(0, i, i + 1), p.levels[levels[i]].stride,
                               {7, 2, true});
    EXPECT_TRUE(torch::equal(out[i], one[0]));
  }
  EXPECT_THROW(multilevel_roi_align(p, t, {0, 0, 4, 0}, {7, 2, true}), ArgumentError);
}

TEST(PyramidLevel, Examples) {
  EXPECT_EQ(assign_pyramid_level({0, 0, 56, 56}, 4), 1);
  EXPECT_EQ(assign_pyramid_level({0, 0, 2, 2}, 4), 0);
  EXPECT_EQ(assign_pyramid_level({0, 0, 112, 112}, 4), 2);
  EXPECT_EQ(assign_pyramid_level({0, 0, 5000, 5000}, 4), 3);
  EXPECT_THROW(assign_pyramid_level({0, 0, 0, 5}, 4), GeometryError);
}

TEST(PyramidLevel, MonotoneInArea) {
  int prev = 0;
  for (double side = 1; side < 600; side *= 1.07) {
    const int l = assign_pyramid_level({0, 0, side, side}, 4);
    ASSERT_GE(l, prev);
    prev = l;
  }
}

TEST(BoxGeometry, IouExamples) {
  EXPECT_DOUBLE_EQ(box_iou({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
  EXPECT_NEAR(box_iou({0, 0, 1, 1}, {0.5, 0, 1.5, 1}), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(box_iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);
  EXPECT_EQ(box_iou({0, 0, 0, 1}, {0, 0, 1, 1}), 0.0);
}

TEST(BoxGeometry, IouSymmetricAndBounded) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const Box a{rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(10, 20), rng.uniform(10, 20)};
    const Box b{rng.uniform(0, 15), rng.uniform(0, 15), rng.uniform(5, 25), rng.uniform(5, 25)};
    const double v = box_iou(a, b);
    ASSERT_EQ(v, box_iou(b, a));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(BoxCoderTest, EncodeDecodeRoundTrip) {
  const auto ref = boxes_to_tensor({{2, 3, 20, 15}, {0, 0, 5, 40}});
  const auto tgt = boxes_to_tensor({{4, 1, 18, 22}, {1, 2, 6, 38}});
  const BoxCoder coder;
  const auto back = coder.decode(ref, coder.encode(ref, tgt));
  EXPECT_LT((back - tgt).abs().max().item<double>(), 1e-9);
  EXPECT_LT(coder.encode(ref, ref).abs().max().item<double>(), 1e-12);
}

TEST(Nms, SuppressesOverlapsAndKeepsOrder) {
  const std::vector<Box> boxes{{0, 0, 10, 10}, {1, 0, 11, 10}, {20, 20, 30, 30}, {0, 0, 10, 10}};
  const std::vector<float> scores{0.5f, 0.9f, 0.7f, 0.9f};
  const auto keep = nms(boxes, scores, 0.5);
  EXPECT_EQ(keep, (std::vector<int>{1, 2}));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = i + 1; j < keep.size(); ++j) EXPECT_LE(box_iou(boxes[keep[i]], boxes[keep[j]]), 0.5);
  }
}

TEST(Sampler, IdenticalProposalsAreForeground) {
  const std::vector<Box> gt{{0, 0, 10, 10}, {20, 20, 40, 30}};
  Rng rng(0);
  RoiBatch p;
  for (const auto& b : gt) p.push_back(b);
  const auto s = sample_rois(p, gt, {512, 1.0, 0.5}, rng);
  ASSERT_EQ(s.size(), 2u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_TRUE(s.is_foreground[i]);
    EXPECT_EQ(s.boxes[i], gt[*s.matched_gt[i]]);
  }
}

TEST(Sampler, OneForegroundSevenBackground) {
  const std::vector<Box> gt{{0, 0, 10, 10}};
  RoiBatch p;
  p.push_back({0, 0, 10, 9});
  for (int i = 0; i < 100; ++i) p.push_back({30.0 + i, 30, 40.0 + i, 40});
  Rng rng(42);
  const auto s = sample_rois(p, gt, {8, 0.25, 0.5}, rng);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_TRUE(s.is_foreground[0]);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_FALSE(s.is_foreground[i]);
  Rng again(42);
  EXPECT_EQ(sample_rois(p, gt, {8, 0.25, 0.5}, again).boxes, s.boxes);
}

TEST(Sampler, IouExactlyHalfIsForeground) {
  const std::vector<Box> gt{{0, 0, 2, 1}};
  RoiBatch p;
  p.push_back({0, 0, 1, 1});  // IoU = 1/2
  Rng rng(0);
  const auto s = sample_rois(p, gt, {4, 1.0, 0.5}, rng);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.is_foreground[0]);
}

TEST(Sampler, ForegroundFractionBounded) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Box> gt;
    for (int g = 0; g < 3; ++g) {
      const double x = rng.uniform(0, 40), y = rng.uniform(0, 40);
      gt.push_back({x, y, x + rng.uniform(4, 20), y + rng.uniform(4, 20)});
    }
    RoiBatch p;
    for (int i = 0; i < 60; ++i) {
      const auto& g = gt[i % 3];
      const double d = rng.uniform(-3, 3);
      p.push_back({g.x1 + d, g.y1 - d, g.x2 + d, g.y2 + d});
    }
    const int total = int(rng.uniform_int(4, 64));
    const double frac = rng.uniform(0.1, 0.5);
    const auto s = sample_rois(p, gt, {total, frac, 0.5}, rng);
    int fg = 0;
    for (bool f : s.is_foreground) fg += f;
    ASSERT_LE(fg, int(std::floor(total * frac)));
    ASSERT_LE(int(s.size()), total);
  }
  RoiBatch empty;
  EXPECT_TRUE(sample_rois(empty, {{0, 0, 1, 1}}, {}, rng).empty());
}

TEST(Proposals, GtModeIsIdentityWithoutJitter) {
  Rng rng(0);
  const std::vector<Box> gt{{1, 2, 10, 12}, {30, 30, 50, 41}};
  const auto b = propose_gt_boxes(gt, 0.0, rng, 64, 64);
  EXPECT_EQ(b.boxes, gt);
}

TEST(Proposals, JitterBelowBoundKeepsIouAboveHalf) {
  ASSERT_LT(0.1, kSafeJitterBound);
  Rng rng(17);
  int moved = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.uniform(0, 200), y = rng.uniform(0, 200);
    const Box g{x, y, x + rng.uniform(2, 100), y + rng.uniform(2, 100)};
    const Box j = jitter_box(g, 0.1, rng, 1e6, 1e6);
    ASSERT_GT(box_iou(j, g), 0.5);
    moved += !(j == g);
  }
  EXPECT_GT(moved, 19000);
  // The bound is tight: shrinking every edge by exactly the bound gives 0.5.
  const double s = kSafeJitterBound;
  EXPECT_NEAR(box_iou({s, s, 1 - s, 1 - s}, {0, 0, 1, 1}), 0.5, 1e-12);
}

TEST(Proposals, LearnedModeContract) {
  torch::manual_seed(0);
  FeaturePyramid p;
  p.image_height = p.image_width = 64;
  for (int l = 0; l < 4; ++l) {
    const int stride = 4 << l;
    p.levels.push_back({stride, torch::randn({1, 8, 64 / stride, 64 / stride})});
  }
  ProposalHead head(8, 4.0);
  const auto out = head->forward(p);
  EXPECT_EQ(out.objectness.size(0), 16 * 16 + 8 * 8 + 4 * 4 + 2 * 2);
  const auto b = select_proposals(out, 64, 64, 1000, 100, 0.7);
  EXPECT_LE(b.size(), 100u);
  EXPECT_FALSE(b.empty());
  for (const auto& box : b.boxes) {
    EXPECT_GT(box.x2, box.x1);
    EXPECT_GT(box.y2, box.y1);
  }
  Rng rng(0);
  const auto losses = proposal_losses(out, {{4, 4, 30, 30}}, 64, rng);
  EXPECT_TRUE(std::isfinite(losses.objectness.item<double>()));
  EXPECT_TRUE(std::isfinite(losses.box.item<double>()));
}

TEST(BackboneTest, LevelShapes) {
  Backbone net(BackboneConfig{});
  const auto p = net->forward(torch::randn({1, 3, 64, 64}));
  ASSERT_EQ(p.num_levels(), 4);
  const int sizes[4] = {16, 8, 4, 2};
  for (int l = 0; l < 4; ++l) {
    EXPECT_EQ(p.levels[l].stride, 4 << l);
    EXPECT_EQ(p.levels[l].features.sizes(), (std::vector<int64_t>{1, 64, sizes[l], sizes[l]}));
  }
  const auto q = net->forward(torch::randn({1, 3, 70, 45}));
  for (const auto& level : q.levels) {
    EXPECT_EQ(level.features.size(2), (70 + level.stride - 1) / level.stride);
    EXPECT_EQ(level.features.size(3), (45 + level.stride - 1) / level.stride);
  }
}

TEST(BackboneTest, ZeroImageWithZeroBiasesGivesZeroFeatures) {
  Backbone net(BackboneConfig{});
  torch::NoGradGuard no_grad;
  for (auto& p : net->named_parameters()) {
    if (p.key().find("bias") != std::string::npos) p.value().zero_();
  }
  for (const auto& level : net->forward(torch::zeros({1, 3, 64, 64})).levels) {
    EXPECT_EQ(level.features.abs().max().item<float>(), 0.0f);
  }
}

TEST(BackboneTest, ParameterCountMatchesHandCount) {
  const BackboneConfig c;
  auto conv = [](std::int64_t in, std::int64_t out, std::int64_t k) { return in * out * k * k + out; };
  std::int64_t expected = conv(3, c.stem_channels, 3);
  std::int64_t in = c.stem_channels;
  for (int ch : c.stage_channels) {
    expected += conv(in, ch, 3) + conv(ch, ch, 3) + conv(ch, c.pyramid_channels, 1) +
                conv(c.pyramid_channels, c.pyramid_channels, 3);
    in = ch;
  }
  EXPECT_EQ(parameter_count(*Backbone(c)), expected);
}

TEST(DetectionHeadTest, EmptyInputAndZeroWeights) {
  DetectionHead head(4, 7, 32, 3);
  const auto empty = head->forward(torch::zeros({0, 4, 7, 7}));
  EXPECT_EQ(empty.class_logits.sizes(), (std::vector<int64_t>{0, 4}));
  EXPECT_EQ(empty.box_deltas.sizes(), (std::vector<int64_t>{0, 3, 4}));
  torch::NoGradGuard no_grad;
  for (auto& p : head->parameters()) p.zero_();
  const auto out = head->forward(torch::randn({2, 4, 7, 7}));
  EXPECT_EQ(out.class_logits.abs().max().item<float>(), 0.0f);
  const auto probs = torch::softmax(out.class_logits, 1);
  EXPECT_LT((probs - 0.25).abs().max().item<float>(), 1e-7);
}

TEST(BaselineMaskHeadTest, ShapeAndHomogeneity) {
  MaskHeadConfig cfg;
  cfg.channels = 8;
  BaselineMaskHead head(6, cfg, 3);
  EXPECT_EQ(head->forward(torch::randn({3, 6, 14, 14})).sizes(), (std::vector<int64_t>{3, 3, 28, 28}));

  cfg.activation = Activation::kIdentity;
  BaselineMaskHead linear(6, cfg, 3);
  torch::NoGradGuard no_grad;
  for (auto& p : linear->named_parameters()) {
    if (p.key().find("bias") != std::string::npos) p.value().zero_();
  }
  const auto x = torch::randn({2, 6, 14, 14});
  EXPECT_TRUE(torch::allclose(linear->forward(2 * x), 2 * linear->forward(x), 1e-4, 1e-5));
}

TEST(PasteMask, Contract) {
  const std::vector<float> ones(28 * 28, 1.0f), zeros(28 * 28, 0.0f);
  const auto full = paste_mask(ones, 28, {3, 4, 11, 9}, 16, 16);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) EXPECT_EQ(full.at(r, c), (r >= 4 && r < 9 && c >= 3 && c < 11) ? 1 : 0);
  }
  EXPECT_EQ(paste_mask(zeros, 28, {3, 4, 11, 9}, 16, 16).area(), 0);
  const auto clipped = paste_mask(ones, 28, {10, 2, 25, 6}, 16, 16);
  EXPECT_EQ(clipped.width(), 16);
  EXPECT_EQ(clipped.area(), 6 * 4);
}

TEST(PasteMask, NonzeroOnlyInsideBox) {
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    std::vector<float> probs(28 * 28);
    for (auto& v : probs) v = float(rng.uniform());
    const double x1 = rng.uniform(-5, 20), y1 = rng.uniform(-5, 20);
    const Box b{x1, y1, x1 + rng.uniform(1, 20), y1 + rng.uniform(1, 20)};
    const auto m = paste_mask(probs, 28, b, 24, 24);
    for (int r = 0; r < 24; ++r) {
      for (int c = 0; c < 24; ++c) {
        if (m.at(r, c)) ASSERT_TRUE(c + 0.5 >= b.x1 && c + 0.5 < b.x2 && r + 0.5 >= b.y1 && r + 0.5 < b.y2);
      }
    }
  }
}

TEST(DetectorTest, EmptyProposalSetIsHandled) {
  torch::manual_seed(0);
  Detector model(ModelConfig{});
  auto sample = data::generate_shapes_dataset(1, 1, 64, 2)[0];
  sample.annotations.clear();
  EXPECT_TRUE(model->infer(sample, EvalConfig{}).empty());
  Rng rng(0);
  model->train();
  const auto losses = model->forward_train(sample, TrainConfig{}, rng);
  EXPECT_EQ(losses.num_foreground, 0);
  EXPECT_TRUE(std::isfinite(losses.l_cls.item<double>()));
  EXPECT_EQ(losses.l_mask.item<double>(), 0.0);
}

TEST(DetectorTest, InferenceOutputsAreWellFormed) {
  torch::manual_seed(1);
  Detector model(ModelConfig{});
  const auto sample = data::generate_shapes_dataset(2, 1, 64, 3)[0];
  EvalConfig ec;
  ec.score_threshold = 0.0;
  model->eval();
  const auto dets = model->infer(sample, ec);
  ASSERT_FALSE(dets.empty());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (i > 0) EXPECT_GE(dets[i - 1].score, dets[i].score);
    EXPECT_EQ(dets[i].mask_side, 28);
    EXPECT_EQ(dets[i].mask.height(), 64);
    EXPECT_GE(dets[i].score, 0.0f);
    EXPECT_LE(dets[i].score, 1.0f);
  }
}
