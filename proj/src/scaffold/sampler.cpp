#include "maskcraft/scaffold/sampler.hpp"

#include <cmath>
#include <utility>

namespace maskcraft::scaffold {

std::vector<int> random_subset(std::vector<int> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                            static_cast<std::int64_t>(pool.size()) - 1));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

RoiBatch sample_rois(const RoiBatch& proposals, const std::vector<Box>& gt, const SamplerOptions& options, Rng& rng) {
  if (proposals.empty()) return {};
  RoiBatch labeled = proposals;
  std::vector<int> fg, bg;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    double best = -1.0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double iou = box_iou(labeled.boxes[i], gt[g]);
      if (iou > best) {
        best = iou;
        best_gt = static_cast<int>(g);
      }
    }
    const bool is_fg = best_gt >= 0 && best >= options.fg_iou_threshold;
    labeled.is_foreground[i] = is_fg;
    labeled.matched_gt[i] = is_fg ? std::optional<int>(best_gt) : std::nullopt;
    (is_fg ? fg : bg).push_back(static_cast<int>(i));
  }
  const auto fg_quota = static_cast<std::size_t>(std::floor(options.total * options.pos_fraction));
  fg = random_subset(std::move(fg), fg_quota, rng);
  bg = random_subset(std::move(bg), static_cast<std::size_t>(options.total) - fg.size(), rng);
  std::vector<int> keep = fg;
  keep.insert(keep.end(), bg.begin(), bg.end());
  return labeled.select(keep);
}

}  // namespace maskcraft::scaffold
