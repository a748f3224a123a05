#include "maskcraft/scaffold/box_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace maskcraft::scaffold {
namespace {

const double kScaleClamp = std::log(1000.0 / 16.0);

}  // namespace

torch::Tensor BoxCoder::encode(const torch::Tensor& reference, const torch::Tensor& target) const {
  const auto rw = reference.select(1, 2) - reference.select(1, 0);
  const auto rh = reference.select(1, 3) - reference.select(1, 1);
  const auto rx = reference.select(1, 0) + 0.5 * rw;
  const auto ry = reference.select(1, 1) + 0.5 * rh;
  const auto tw = target.select(1, 2) - target.select(1, 0);
  const auto th = target.select(1, 3) - target.select(1, 1);
  const auto tx = target.select(1, 0) + 0.5 * tw;
  const auto ty = target.select(1, 1) + 0.5 * th;
  return torch::stack({weights[0] * (tx - rx) / rw, weights[1] * (ty - ry) / rh, weights[2] * torch::log(tw / rw),
                       weights[3] * torch::log(th / rh)},
                      1);
}

torch::Tensor BoxCoder::decode(const torch::Tensor& reference, const torch::Tensor& deltas) const {
  const auto ref = reference.to(deltas.scalar_type());
  const auto rw = ref.select(1, 2) - ref.select(1, 0);
  const auto rh = ref.select(1, 3) - ref.select(1, 1);
  const auto rx = ref.select(1, 0) + 0.5 * rw;
  const auto ry = ref.select(1, 1) + 0.5 * rh;
  const auto dx = deltas.select(1, 0) / weights[0];
  const auto dy = deltas.select(1, 1) / weights[1];
  const auto dw = (deltas.select(1, 2) / weights[2]).clamp_max(kScaleClamp);
  const auto dh = (deltas.select(1, 3) / weights[3]).clamp_max(kScaleClamp);
  const auto cx = rx + dx * rw;
  const auto cy = ry + dy * rh;
  const auto w = rw * torch::exp(dw);
  const auto h = rh * torch::exp(dh);
  return torch::stack({cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h}, 1);
}

std::vector<int> nms(const std::vector<Box>& boxes, const std::vector<float>& scores, double iou_threshold) {
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  std::vector<int> keep;
  std::vector<bool> suppressed(boxes.size(), false);
  for (int i : order) {
    if (suppressed[i]) continue;
    keep.push_back(i);
    for (int j : order) {
      if (!suppressed[j] && j != i && box_iou(boxes[i], boxes[j]) > iou_threshold) suppressed[j] = true;
    }
  }
  return keep;
}

}  // namespace maskcraft::scaffold
