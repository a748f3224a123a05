#include "maskcraft/data/mask.hpp"

#include <numeric>
#include <string>

#include "maskcraft/errors.hpp"

namespace maskcraft::data {

BinaryMask::BinaryMask(int height, int width)
    : height_(height), width_(width), pixels_(static_cast<std::size_t>(height) * width, 0) {
  if (height < 0 || width < 0) throw ArgumentError("mask dimensions must be non-negative");
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 0 || width < 0) throw ArgumentError("mask dimensions must be non-negative");
  if (pixels_.size() != static_cast<std::size_t>(height) * width) {
    throw ArgumentError("mask payload size does not match " + std::to_string(height) + "x" +
                        std::to_string(width));
  }
  for (auto& p : pixels_) p = p ? 1 : 0;
}

std::int64_t BinaryMask::area() const {
  return std::accumulate(pixels_.begin(), pixels_.end(), std::int64_t{0});
}

std::optional<Box> BinaryMask::tight_box() const {
  int rmin = height_, rmax = -1, cmin = width_, cmax = -1;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!at(r, c)) continue;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
  }
  if (rmax < 0) return std::nullopt;
  return Box{double(cmin), double(rmin), double(cmax + 1), double(rmax + 1)};
}

RleMask rle_encode(const BinaryMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (int c = 0; c < mask.width(); ++c) {
    for (int r = 0; r < mask.height(); ++r) {
      const std::uint8_t v = mask.at(r, c);
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
  if (rle.height < 0 || rle.width < 0) throw CodecError("negative RLE dimensions");
  const std::int64_t total = std::int64_t{rle.height} * rle.width;
  std::int64_t sum = 0;
  for (auto n : rle.counts) {
    if (n < 0) throw CodecError("negative RLE count");
    sum += n;
  }
  if (sum != total) {
    throw CodecError("RLE counts sum to " + std::to_string(sum) + ", expected " + std::to_string(total));
  }
  BinaryMask mask(rle.height, rle.width);
  std::int64_t pos = 0;
  std::uint8_t value = 0;
  for (auto n : rle.counts) {
    if (value) {
      for (std::int64_t k = pos; k < pos + n; ++k) {
        mask.set(static_cast<int>(k % rle.height), static_cast<int>(k / rle.height), true);
      }
    }
    pos += n;
    value ^= 1;
  }
  return mask;
}

}  // namespace maskcraft::data
