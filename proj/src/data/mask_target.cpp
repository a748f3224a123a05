#include "maskcraft/data/mask_target.hpp"

#include <algorithm>
#include <cmath>

#include "maskcraft/errors.hpp"

namespace maskcraft::data {

MaskTarget make_mask_target(const InstanceAnnotation& annotation, const Box& box, int side) {
  if (!box.valid()) throw GeometryError("mask target box must have positive area");
  if (side <= 0) throw ArgumentError("mask target side must be positive");
  const BinaryMask& mask = annotation.mask;
  const int h = mask.height(), w = mask.width();
  if (h == 0 || w == 0) throw GeometryError("mask target needs a non-empty mask canvas");
  // Crop: the pixels whose footprint intersects the box, clipped to the image.
  const int cmin = std::clamp(static_cast<int>(std::floor(box.x1)), 0, w - 1);
  const int cmax = std::clamp(static_cast<int>(std::ceil(box.x2)) - 1, cmin, w - 1);
  const int rmin = std::clamp(static_cast<int>(std::floor(box.y1)), 0, h - 1);
  const int rmax = std::clamp(static_cast<int>(std::ceil(box.y2)) - 1, rmin, h - 1);
  auto value = [&](int r, int c) -> double {
    return mask.at(std::clamp(r, rmin, rmax), std::clamp(c, cmin, cmax));
  };

  MaskTarget target{side, std::vector<float>(static_cast<std::size_t>(side) * side, 0.0f)};
  const double cell_w = box.width() / side;
  const double cell_h = box.height() / side;
  for (int i = 0; i < side; ++i) {
    // Continuous coordinate in units where pixel centers sit on integers.
    const double v = std::clamp(box.y1 + (i + 0.5) * cell_h - 0.5, double(rmin), double(rmax));
    const int r0 = static_cast<int>(std::floor(v));
    const double fy = v - r0;
    for (int j = 0; j < side; ++j) {
      const double u = std::clamp(box.x1 + (j + 0.5) * cell_w - 0.5, double(cmin), double(cmax));
      const int c0 = static_cast<int>(std::floor(u));
      const double fx = u - c0;
      const double s = (1 - fy) * ((1 - fx) * value(r0, c0) + fx * value(r0, c0 + 1)) +
                       fy * ((1 - fx) * value(r0 + 1, c0) + fx * value(r0 + 1, c0 + 1));
      target.values[static_cast<std::size_t>(i) * side + j] = s >= 0.5 ? 1.0f : 0.0f;
    }
  }
  return target;
}

}  // namespace maskcraft::data
