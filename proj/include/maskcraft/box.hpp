#pragma once

#include <algorithm>

namespace maskcraft {

/// Axis-aligned box in corner form, image pixel coordinates.
/// Pixel (r, c) covers [c, c+1) x [r, r+1).
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool valid() const { return x2 > x1 && y2 > y1; }

  friend bool operator==(const Box&, const Box&) = default;
};

/// COCO (x, y, w, h) box.
struct XywhBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  Box to_corners() const { return {x, y, x + w, y + h}; }
  static XywhBox from_corners(const Box& b) { return {b.x1, b.y1, b.x2 - b.x1, b.y2 - b.y1}; }

  friend bool operator==(const XywhBox&, const XywhBox&) = default;
};

/// Intersection-over-union of two boxes. Degenerate or disjoint boxes give 0.
inline double box_iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) return 0.0;
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

/// Clip a box to [0, width] x [0, height].
inline Box clip_box(const Box& b, double width, double height) {
  return {std::clamp(b.x1, 0.0, width), std::clamp(b.y1, 0.0, height),
          std::clamp(b.x2, 0.0, width), std::clamp(b.y2, 0.0, height)};
}

}  // namespace maskcraft
