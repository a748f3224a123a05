#pragma once

#include <span>

#include "maskcraft/box.hpp"
#include "maskcraft/data/mask.hpp"

namespace maskcraft::scaffold {

/// Resamples a side x side probability grid (row-major) onto the box and
/// writes it into an H x W canvas: pixels whose centre lies inside the box
/// take the bilinear (edge-clamped) sample and are set when it is
/// >= threshold. Everything outside the box or the image stays 0.
data::BinaryMask paste_mask(std::span<const float> probs, int side, const Box& box, int image_height,
                            int image_width, double threshold = 0.5);

}  // namespace maskcraft::scaffold
