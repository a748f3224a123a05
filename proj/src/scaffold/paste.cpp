#include "maskcraft/scaffold/paste.hpp"

#include <algorithm>
#include <cmath>

#include "maskcraft/errors.hpp"

namespace maskcraft::scaffold {

data::BinaryMask paste_mask(std::span<const float> probs, int side, const Box& box, int image_height,
                            int image_width, double threshold) {
  if (side <= 0 || probs.size() != static_cast<std::size_t>(side) * side) {
    throw ArgumentError("paste_mask: probability grid size mismatch");
  }
  data::BinaryMask out(image_height, image_width);
  if (!box.valid()) return out;
  const int c0 = std::max(0, static_cast<int>(std::floor(box.x1 - 0.5)));
  const int c1 = std::min(image_width - 1, static_cast<int>(std::ceil(box.x2)));
  const int r0 = std::max(0, static_cast<int>(std::floor(box.y1 - 0.5)));
  const int r1 = std::min(image_height - 1, static_cast<int>(std::ceil(box.y2)));
  auto grid = [&](int i, int j) { return probs[static_cast<std::size_t>(i) * side + j]; };
  for (int r = r0; r <= r1; ++r) {
    const double y = r + 0.5;
    if (y < box.y1 || y >= box.y2) continue;
    const double v = std::clamp((y - box.y1) / box.height() * side - 0.5, 0.0, side - 1.0);
    const int i0 = static_cast<int>(std::floor(v));
    const int i1 = std::min(i0 + 1, side - 1);
    const double fy = v - i0;
    for (int c = c0; c <= c1; ++c) {
      const double x = c + 0.5;
      if (x < box.x1 || x >= box.x2) continue;
      const double u = std::clamp((x - box.x1) / box.width() * side - 0.5, 0.0, side - 1.0);
      const int j0 = static_cast<int>(std::floor(u));
      const int j1 = std::min(j0 + 1, side - 1);
      const double fx = u - j0;
      const double p = (1 - fy) * ((1 - fx) * grid(i0, j0) + fx * grid(i0, j1)) +
                       fy * ((1 - fx) * grid(i1, j0) + fx * grid(i1, j1));
      if (p >= threshold) out.set(r, c, true);
    }
  }
  return out;
}

}  // namespace maskcraft::scaffold
