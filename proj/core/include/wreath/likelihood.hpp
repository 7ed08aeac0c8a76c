#pragma once

#include <cstdint>
#include <vector>

#include "wreath/renderer.hpp"

namespace wreath {

/// Thresholded observation. `inverted` records whether polarity was flipped
/// (dark-on-light input: more than half of the border pixels were ink).
struct BinaryImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  // 0/1, row-major
  bool inverted = false;

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  long long ink_count() const {
    long long n = 0;
    for (const auto v : pixels) n += v;
    return n;
  }
};

/// Threshold at `threshold` (ink = value > threshold), then flip polarity if
/// strictly more than half of the border pixels came out as ink.
BinaryImage binarize(const Raster& img, double threshold = 0.5);

/// Per-pixel Bernoulli log likelihood of the binary observation under a
/// rendered intensity image: sum of log p(pixel), with the rendered
/// probability clamped to [p_min, 1 - p_min]. Summation is a fixed serial
/// left-to-right pass, so results are bit-reproducible.
double log_likelihood(const BinaryImage& obs, const Raster& rendered,
                      double p_min = 1e-4);

}  // namespace wreath
