#pragma once

#include <cstdint>
#include <vector>

#include "maskcraft/data/sample.hpp"

namespace maskcraft::data {

enum class ShapeKind : int { kCircle = 1, kRectangle = 2, kTriangle = 3 };

/// Category table for the synthetic shapes: circle=1, rectangle=2, triangle=3.
std::vector<Category> shape_categories();

/// Deterministic synthetic instance-segmentation data. Each image holds
/// 1..max_instances shapes drawn back to front; a later shape owns every
/// pixel it covers and earlier masks are punched out. Instances left with
/// fewer than `kMinVisiblePixels` pixels are dropped.
///
/// The output is a pure function of the four arguments.
std::vector<ImageSample> generate_shapes_dataset(std::uint64_t seed, int count, int image_size,
                                                 int max_instances);

inline constexpr int kMinVisiblePixels = 6;

/// Convenience: samples plus the shape category table.
Dataset make_shapes_dataset(std::uint64_t seed, int count, int image_size, int max_instances);

}  // namespace maskcraft::data
