#include "maskcraft/cli/render.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

namespace maskcraft::cli {

namespace {

constexpr float kMaskBlend = 0.5f;

// 3x5 glyphs, one row per entry, high bit on the left.
const std::array<std::array<std::uint8_t, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7},  // 0
    {2, 6, 2, 2, 7},  // 1
    {7, 1, 7, 4, 7},  // 2
    {7, 1, 7, 1, 7},  // 3
    {5, 5, 7, 1, 1},  // 4
    {7, 4, 7, 1, 7},  // 5
    {7, 4, 7, 5, 7},  // 6
    {7, 1, 1, 1, 1},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 1, 7},  // 9
}};
const std::array<std::uint8_t, 5> kDot{0, 0, 0, 0, 2};

void paint(Overlay& o, int r, int c, const std::array<float, 3>& color) {
  if (r < 0 || c < 0 || r >= o.image.height || c >= o.image.width) return;
  for (int ch = 0; ch < 3; ++ch) o.image.at(r, c, ch) = color[ch];
  o.stroke_pixels.set(r, c, true);
}

void draw_text(Overlay& o, int top, int left, const std::string& text, const std::array<float, 3>& color) {
  int x = left;
  for (char ch : text) {
    const std::array<std::uint8_t, 5>* glyph = nullptr;
    if (ch >= '0' && ch <= '9') glyph = &kDigits[ch - '0'];
    if (ch == '.') glyph = &kDot;
    if (glyph) {
      for (int gy = 0; gy < 5; ++gy) {
        for (int gx = 0; gx < 3; ++gx) {
          if ((*glyph)[gy] & (4 >> gx)) paint(o, top + gy, x + gx, color);
        }
      }
    }
    x += 4;
  }
}

}  // namespace

std::array<float, 3> category_color(int category_id) {
  static const std::array<std::array<float, 3>, 6> palette{{
      {0.95f, 0.25f, 0.25f},
      {0.25f, 0.85f, 0.3f},
      {0.3f, 0.45f, 0.95f},
      {0.95f, 0.8f, 0.2f},
      {0.8f, 0.3f, 0.9f},
      {0.2f, 0.85f, 0.9f},
  }};
  return palette[static_cast<std::size_t>(std::max(0, category_id - 1)) % palette.size()];
}

Overlay render_overlay(const data::Image& source, const std::vector<Detection>& detections) {
  Overlay o{source, data::BinaryMask(source.height, source.width), data::BinaryMask(source.height, source.width)};
  for (const auto& d : detections) {
    if (d.mask.height() != source.height || d.mask.width() != source.width) continue;
    const auto color = category_color(d.category_id);
    for (int r = 0; r < source.height; ++r) {
      for (int c = 0; c < source.width; ++c) {
        if (!d.mask.at(r, c)) continue;
        for (int ch = 0; ch < 3; ++ch) {
          o.image.at(r, c, ch) = (1.0f - kMaskBlend) * o.image.at(r, c, ch) + kMaskBlend * color[ch];
        }
        o.mask_pixels.set(r, c, true);
      }
    }
  }
  for (const auto& d : detections) {
    const auto color = category_color(d.category_id);
    const int x1 = static_cast<int>(std::floor(d.box.x1)), y1 = static_cast<int>(std::floor(d.box.y1));
    const int x2 = static_cast<int>(std::ceil(d.box.x2)) - 1, y2 = static_cast<int>(std::ceil(d.box.y2)) - 1;
    for (int c = x1; c <= x2; ++c) {
      paint(o, y1, c, color);
      paint(o, y2, c, color);
    }
    for (int r = y1; r <= y2; ++r) {
      paint(o, r, x1, color);
      paint(o, r, x2, color);
    }
    char label[32];
    std::snprintf(label, sizeof label, "%d %.2f", d.category_id, static_cast<double>(d.score));
    const int top = y1 >= 6 ? y1 - 6 : y1 + 2;
    draw_text(o, top, x1 + 1, label, color);
  }
  return o;
}

}  // namespace maskcraft::cli
