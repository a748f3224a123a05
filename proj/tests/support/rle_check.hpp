#pragma once

// Run-length codec checks against a hand-written column-major scan.

#include <cstdint>
#include <vector>

#include "maskcraft/data/mask.hpp"
#include "maskcraft/rng.hpp"

namespace rle_check {

using maskcraft::Rng;
using maskcraft::data::BinaryMask;

inline BinaryMask random_mask(Rng& rng, int h, int w, double density) {
  BinaryMask m(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) m.set(r, c, rng.uniform() < density);
  }
  return m;
}

// Column-major scan written out by hand.
inline std::vector<std::int64_t> scan_counts(const BinaryMask& m) {
  std::vector<std::int64_t> counts;
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (int c = 0; c < m.width(); ++c) {
    for (int r = 0; r < m.height(); ++r) {
      if (m.at(r, c) != current) {
        counts.push_back(run);
        run = 0;
        current = m.at(r, c);
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

struct Outcome {
  int cases = 0;
  int failures = 0;
  bool examples = false;
};

inline Outcome run(int count, std::uint64_t seed = 11) {
  using maskcraft::data::rle_decode;
  using maskcraft::data::rle_encode;
  Outcome o;
  BinaryMask corner(3, 3);
  corner.set(0, 0, true);
  o.examples = rle_encode(BinaryMask(3, 3)).counts == std::vector<std::int64_t>{9} &&
               rle_encode(corner).counts == std::vector<std::int64_t>{0, 1, 8} &&
               rle_encode(BinaryMask(2, 2, {1, 1, 1, 1})).counts == std::vector<std::int64_t>{0, 4} &&
               rle_decode({3, 3, {9}}) == BinaryMask(3, 3) && rle_decode({3, 3, {0, 1, 8}}) == corner &&
               rle_decode({2, 2, {0, 4}}) == BinaryMask(2, 2, {1, 1, 1, 1});
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int h = int(rng.uniform_int(1, 17)), w = int(rng.uniform_int(1, 23));
    const auto m = random_mask(rng, h, w, rng.uniform());
    const auto rle = rle_encode(m);
    ++o.cases;
    if (rle.counts != scan_counts(m) || rle_decode(rle) != m) ++o.failures;
  }
  return o;
}

}  // namespace rle_check
