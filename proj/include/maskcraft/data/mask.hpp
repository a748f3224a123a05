#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "maskcraft/box.hpp"

namespace maskcraft::data {

/// Dense binary mask, row-major, one byte per pixel holding 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);
  BinaryMask(int height, int width, std::vector<std::uint8_t> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty_shape() const { return height_ == 0 || width_ == 0; }

  std::uint8_t at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  void set(int row, int col, bool on) { pixels_[static_cast<std::size_t>(row) * width_ + col] = on ? 1 : 0; }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }

  /// Number of set pixels.
  std::int64_t area() const;

  /// Tight bounding box of the set pixels in corner form, or nullopt when empty.
  std::optional<Box> tight_box() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Uncompressed COCO run-length encoding: column-major runs, alternating
/// zeros and ones, starting with a (possibly empty) run of zeros.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::int64_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const BinaryMask& mask);

/// Throws CodecError when the counts do not sum to height * width.
BinaryMask rle_decode(const RleMask& rle);

}  // namespace maskcraft::data
