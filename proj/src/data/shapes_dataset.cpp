#include "maskcraft/data/shapes_dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "maskcraft/errors.hpp"
#include "maskcraft/rng.hpp"

namespace maskcraft::data {
namespace {

struct Shape {
  ShapeKind kind;
  double cx, cy;
  double half_w, half_h;  // rectangle half extents, circle radius in half_w
  std::array<double, 6> tri;
};

double cross(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

bool covers(const Shape& s, double x, double y) {
  switch (s.kind) {
    case ShapeKind::kCircle: {
      const double dx = x - s.cx, dy = y - s.cy;
      return dx * dx + dy * dy <= s.half_w * s.half_w;
    }
    case ShapeKind::kRectangle:
      return std::abs(x - s.cx) <= s.half_w && std::abs(y - s.cy) <= s.half_h;
    case ShapeKind::kTriangle: {
      const auto& t = s.tri;
      const double d1 = cross(t[0], t[1], t[2], t[3], x, y);
      const double d2 = cross(t[2], t[3], t[4], t[5], x, y);
      const double d3 = cross(t[4], t[5], t[0], t[1], x, y);
      const bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
      const bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
      return !(has_neg && has_pos);
    }
  }
  return false;
}

Shape random_shape(Rng& rng, int size) {
  Shape s{};
  s.kind = static_cast<ShapeKind>(rng.uniform_int(1, 3));
  const double min_extent = std::max(6.0, size / 8.0);
  const double max_extent = std::max(min_extent + 1.0, size / 2.5);
  const double extent = rng.uniform(min_extent, max_extent);
  s.cx = rng.uniform(0.1 * size, 0.9 * size);
  s.cy = rng.uniform(0.1 * size, 0.9 * size);
  switch (s.kind) {
    case ShapeKind::kCircle:
      s.half_w = s.half_h = extent / 2.0;
      break;
    case ShapeKind::kRectangle:
      s.half_w = extent * rng.uniform(0.5, 1.0) / 2.0;
      s.half_h = extent * rng.uniform(0.5, 1.0) / 2.0;
      break;
    case ShapeKind::kTriangle: {
      const double theta0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double radius = extent / 2.0 * 1.15;
      for (int k = 0; k < 3; ++k) {
        const double theta = theta0 + 2.0 * std::numbers::pi * k / 3.0 + rng.uniform(-0.3, 0.3);
        s.tri[2 * k] = s.cx + radius * std::cos(theta);
        s.tri[2 * k + 1] = s.cy + radius * std::sin(theta);
      }
      s.half_w = s.half_h = radius;
      break;
    }
  }
  return s;
}

ImageSample generate_one(Rng& rng, std::int64_t image_id, std::int64_t& next_ann_id, int size,
                         int max_instances) {
  for (;;) {
    ImageSample sample;
    sample.image_id = image_id;
    char name[32];
    std::snprintf(name, sizeof(name), "%06lld.ppm", static_cast<long long>(image_id));
    sample.file_name = name;
    sample.image = Image(size, size);

    std::array<int, 3> bg{};
    for (auto& c : bg) c = static_cast<int>(rng.uniform_int(0, 100));
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          const int v = std::clamp(bg[ch] + static_cast<int>(rng.uniform_int(-8, 8)), 0, 255);
          sample.image.at(r, c, ch) = static_cast<float>(v) / 255.0f;
        }
      }
    }

    const int n = static_cast<int>(rng.uniform_int(1, max_instances));
    std::vector<Shape> shapes;
    std::vector<BinaryMask> masks;
    for (int i = 0; i < n; ++i) {
      const Shape s = random_shape(rng, size);
      std::array<int, 3> color{};
      for (auto& c : color) c = static_cast<int>(rng.uniform_int(120, 255));
      BinaryMask m(size, size);
      for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
          if (!covers(s, c + 0.5, r + 0.5)) continue;
          m.set(r, c, true);
          for (auto& earlier : masks) earlier.set(r, c, false);
          for (int ch = 0; ch < 3; ++ch) sample.image.at(r, c, ch) = static_cast<float>(color[ch]) / 255.0f;
        }
      }
      shapes.push_back(s);
      masks.push_back(std::move(m));
    }

    std::int64_t ann_id = next_ann_id;
    for (int i = 0; i < n; ++i) {
      if (masks[i].area() < kMinVisiblePixels) continue;
      InstanceAnnotation ann;
      ann.id = ann_id++;
      ann.category_id = static_cast<int>(shapes[i].kind);
      ann.bbox = XywhBox::from_corners(*masks[i].tight_box());
      ann.mask = std::move(masks[i]);
      sample.annotations.push_back(std::move(ann));
    }
    if (sample.annotations.empty()) continue;
    next_ann_id = ann_id;
    return sample;
  }
}

}  // namespace

std::vector<Category> shape_categories() {
  return {{1, "circle"}, {2, "rectangle"}, {3, "triangle"}};
}

std::vector<ImageSample> generate_shapes_dataset(std::uint64_t seed, int count, int image_size,
                                                 int max_instances) {
  if (count < 1) throw ArgumentError("count must be >= 1");
  if (image_size < 32) throw ArgumentError("image_size must be >= 32");
  if (max_instances < 1) throw ArgumentError("max_instances must be >= 1");
  Rng rng(seed);
  std::vector<ImageSample> out;
  out.reserve(count);
  std::int64_t next_ann_id = 1;
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_one(rng, i + 1, next_ann_id, image_size, max_instances));
  }
  return out;
}

Dataset make_shapes_dataset(std::uint64_t seed, int count, int image_size, int max_instances) {
  return {shape_categories(), generate_shapes_dataset(seed, count, image_size, max_instances)};
}

}  // namespace maskcraft::data
