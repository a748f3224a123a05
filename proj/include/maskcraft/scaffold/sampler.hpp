#pragma once

#include <vector>

#include "maskcraft/box.hpp"
#include "maskcraft/rng.hpp"
#include "maskcraft/scaffold/proposals.hpp"

namespace maskcraft::scaffold {

struct SamplerOptions {
  int total = 512;
  double pos_fraction = 0.25;
  double fg_iou_threshold = 0.5;
};

/// Labels each proposal foreground when its best IoU with a gt box is
/// >= fg_iou_threshold (recording that gt), background otherwise, then draws
/// at most floor(total * pos_fraction) foreground RoIs and fills up to
/// `total` with background. Foreground entries come first. Fully determined
/// by the inputs and the generator state.
RoiBatch sample_rois(const RoiBatch& proposals, const std::vector<Box>& gt, const SamplerOptions& options, Rng& rng);

/// Uniformly random subset of size k (order randomized), by partial
/// Fisher-Yates.
std::vector<int> random_subset(std::vector<int> pool, std::size_t k, Rng& rng);

}  // namespace maskcraft::scaffold
