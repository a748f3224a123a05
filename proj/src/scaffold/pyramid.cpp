#include "maskcraft/scaffold/pyramid.hpp"

#include <algorithm>
#include <cmath>

#include "maskcraft/errors.hpp"

namespace maskcraft::scaffold {

int assign_pyramid_level(const Box& box, int num_levels, double canonical_scale, int canonical_level) {
  if (!box.valid()) throw GeometryError("pyramid assignment needs a box with positive area");
  const double scale = std::sqrt(box.area());
  const double level = std::floor(canonical_level + std::log2(scale / canonical_scale));
  return static_cast<int>(std::clamp(level, 0.0, static_cast<double>(num_levels - 1)));
}

}  // namespace maskcraft::scaffold
