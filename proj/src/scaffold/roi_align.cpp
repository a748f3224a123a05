#include "maskcraft/scaffold/roi_align.hpp"

#include "maskcraft/errors.hpp"

namespace maskcraft::scaffold {
namespace {

struct AxisSamples {
  torch::Tensor low;     // N x P int64
  torch::Tensor high;    // N x P int64
  torch::Tensor w_low;   // N x P
  torch::Tensor w_high;  // N x P
};

// Bilinear taps along one axis for sample positions `pos` (N x P, double).
AxisSamples axis_taps(torch::Tensor pos, int64_t length) {
  const auto valid = (pos >= -1.0).logical_and(pos <= static_cast<double>(length)).to(torch::kDouble);
  pos = pos.clamp_min(0.0);
  auto low = pos.floor().to(torch::kLong);
  const auto at_edge = low >= length - 1;
  low = torch::where(at_edge, torch::full_like(low, length - 1), low);
  auto high = torch::where(at_edge, low, low + 1);
  pos = torch::where(at_edge, low.to(torch::kDouble), pos);
  const auto frac = pos - low.to(torch::kDouble);
  return {low, high, (1.0 - frac) * valid, frac * valid};
}

}  // namespace

torch::Tensor roi_align(const torch::Tensor& features, const torch::Tensor& boxes, int stride,
                        const RoiAlignOptions& options) {
  TORCH_CHECK(features.dim() == 3 || (features.dim() == 4 && features.size(0) == 1),
              "roi_align expects C x h x w features");
  TORCH_CHECK(boxes.dim() == 2 && boxes.size(1) == 4, "roi_align expects N x 4 boxes");
  if (options.output_size < 1 || options.sampling_ratio < 1) throw ArgumentError("roi_align sizes must be positive");
  const auto f = features.dim() == 4 ? features.squeeze(0) : features;
  const int64_t C = f.size(0), h = f.size(1), w = f.size(2);
  const int64_t N = boxes.size(0);
  const int s = options.output_size;
  const int sr = options.sampling_ratio;
  if (N == 0) return torch::zeros({0, C, s, s}, f.options());

  const auto b = boxes.detach().to(torch::kDouble).cpu();
  if (!(b.select(1, 2) > b.select(1, 0)).all().item<bool>() || !(b.select(1, 3) > b.select(1, 1)).all().item<bool>()) {
    throw GeometryError("roi_align requires boxes with positive width and height");
  }
  const double scale = 1.0 / stride;
  const double offset = options.aligned ? 0.5 : 0.0;
  const auto x1 = b.select(1, 0) * scale - offset;
  const auto y1 = b.select(1, 1) * scale - offset;
  auto roi_w = b.select(1, 2) * scale - offset - x1;
  auto roi_h = b.select(1, 3) * scale - offset - y1;
  if (!options.aligned) {
    roi_w = roi_w.clamp_min(1.0);
    roi_h = roi_h.clamp_min(1.0);
  }
  const int64_t P = static_cast<int64_t>(s) * sr;
  // Sample k sits at (k + 0.5) / sr bins from the box origin.
  const auto t = (torch::arange(P, torch::kDouble) + 0.5) / sr;
  const auto xs = x1.unsqueeze(1) + t.unsqueeze(0) * (roi_w / s).unsqueeze(1);
  const auto ys = y1.unsqueeze(1) + t.unsqueeze(0) * (roi_h / s).unsqueeze(1);
  const AxisSamples ty = axis_taps(ys, h);
  const AxisSamples tx = axis_taps(xs, w);

  const auto dev = f.device();
  const auto dtype = f.scalar_type();
  auto as_weight = [&](const torch::Tensor& x) { return x.to(dev, dtype); };

  // Interpolate along y: C x N x P x w.
  const auto rows_low = f.index_select(1, ty.low.reshape(-1).to(dev)).view({C, N, P, w});
  const auto rows_high = f.index_select(1, ty.high.reshape(-1).to(dev)).view({C, N, P, w});
  const auto by_rows =
      rows_low * as_weight(ty.w_low).view({1, N, P, 1}) + rows_high * as_weight(ty.w_high).view({1, N, P, 1});

  // Then along x: C x N x P x P.
  const auto gx_low = tx.low.to(dev).view({1, N, 1, P}).expand({C, N, P, P});
  const auto gx_high = tx.high.to(dev).view({1, N, 1, P}).expand({C, N, P, P});
  const auto samples = by_rows.gather(3, gx_low) * as_weight(tx.w_low).view({1, N, 1, P}) +
                       by_rows.gather(3, gx_high) * as_weight(tx.w_high).view({1, N, 1, P});

  return samples.view({C, N, s, sr, s, sr}).mean({3, 5}).permute({1, 0, 2, 3}).contiguous();
}

torch::Tensor multilevel_roi_align(const FeaturePyramid& pyramid, const torch::Tensor& boxes,
                                   const std::vector<int>& levels, const RoiAlignOptions& options) {
  const int64_t N = boxes.size(0);
  TORCH_CHECK(static_cast<int64_t>(levels.size()) == N, "one level per RoI");
  const int64_t C = pyramid.channels();
  const auto& ref = pyramid.levels.front().features;
  if (N == 0) return torch::zeros({0, C, options.output_size, options.output_size}, ref.options());

  for (int v : levels) {
    if (v < 0 || v >= pyramid.num_levels()) throw ArgumentError("RoI level index out of range");
  }
  std::vector<torch::Tensor> pooled;
  std::vector<int64_t> order;
  for (int l = 0; l < pyramid.num_levels(); ++l) {
    std::vector<int64_t> idx;
    for (int64_t i = 0; i < N; ++i) {
      if (levels[i] == l) idx.push_back(i);
    }
    if (idx.empty()) continue;
    const auto sel = torch::tensor(idx, torch::kLong);
    pooled.push_back(roi_align(pyramid.levels[l].features, boxes.index_select(0, sel), pyramid.levels[l].stride, options));
    order.insert(order.end(), idx.begin(), idx.end());
  }
  std::vector<int64_t> inverse(N);
  for (int64_t k = 0; k < N; ++k) inverse[order[k]] = k;
  return torch::cat(pooled, 0).index_select(0, torch::tensor(inverse, torch::kLong));
}

torch::Tensor boxes_to_tensor(const std::vector<Box>& boxes) {
  auto t = torch::empty({static_cast<int64_t>(boxes.size()), 4}, torch::kDouble);
  auto a = t.accessor<double, 2>();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    a[i][0] = boxes[i].x1;
    a[i][1] = boxes[i].y1;
    a[i][2] = boxes[i].x2;
    a[i][3] = boxes[i].y2;
  }
  return t;
}

std::vector<Box> tensor_to_boxes(const torch::Tensor& boxes) {
  const auto t = boxes.detach().to(torch::kDouble).cpu().contiguous();
  auto a = t.accessor<double, 2>();
  std::vector<Box> out(t.size(0));
  for (int64_t i = 0; i < t.size(0); ++i) out[i] = {a[i][0], a[i][1], a[i][2], a[i][3]};
  return out;
}

}  // namespace maskcraft::scaffold
