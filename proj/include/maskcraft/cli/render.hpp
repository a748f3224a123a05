#pragma once

#include <array>
#include <vector>

#include "maskcraft/data/mask.hpp"
#include "maskcraft/data/sample.hpp"
#include "maskcraft/detector.hpp"

namespace maskcraft::cli {

/// Overlay of detections on an image: masks blended with a per-category
/// color, box outlines, and "category score" labels in a 3x5 pixel font.
struct Overlay {
  data::Image image;
  data::BinaryMask mask_pixels;    // pixels covered by some pasted mask
  data::BinaryMask stroke_pixels;  // box outlines and label glyphs
};

Overlay render_overlay(const data::Image& source, const std::vector<Detection>& detections);

/// RGB color used for a category.
std::array<float, 3> category_color(int category_id);

}  // namespace maskcraft::cli
