#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskcraft/box.hpp"
#include "maskcraft/data/mask.hpp"

namespace maskcraft::data {

/// H x W x 3 image, interleaved RGB, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0.0f) {}

  float& at(int row, int col, int ch) { return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch]; }
  float at(int row, int col, int ch) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

struct InstanceAnnotation {
  std::int64_t id = 0;
  int category_id = 1;
  XywhBox bbox;
  BinaryMask mask;
  bool iscrowd = false;

  friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

struct ImageSample {
  std::int64_t image_id = 0;
  std::string file_name;
  Image image;
  std::vector<InstanceAnnotation> annotations;

  friend bool operator==(const ImageSample&, const ImageSample&) = default;
};

struct Category {
  int id = 0;
  std::string name;
};

/// Loaded or generated dataset with its category table.
struct Dataset {
  std::vector<Category> categories;
  std::vector<ImageSample> samples;
};

}  // namespace maskcraft::data
