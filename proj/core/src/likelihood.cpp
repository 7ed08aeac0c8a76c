#include "wreath/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace wreath {

BinaryImage binarize(const Raster& img, double threshold) {
  BinaryImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    out.pixels[i] = img.pixels[i] > threshold ? 1 : 0;

  if (img.width >= 2 && img.height >= 2) {
    long long border = 0, border_ink = 0;
    for (int x = 0; x < img.width; ++x) {
      border += 2;
      border_ink += out.at(x, 0) + out.at(x, img.height - 1);
    }
    for (int y = 1; y + 1 < img.height; ++y) {
      border += 2;
      border_ink += out.at(0, y) + out.at(img.width - 1, y);
    }
    if (2 * border_ink > border) {
      for (auto& v : out.pixels) v = v ? 0 : 1;
      out.inverted = true;
    }
  }
  return out;
}

double log_likelihood(const BinaryImage& obs, const Raster& rendered,
                      double p_min) {
  if (obs.width != rendered.width || obs.height != rendered.height)
    throw std::invalid_argument("log_likelihood: size mismatch");
  const double lo = p_min, hi = 1.0 - p_min;
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.pixels.size(); ++i) {
    double p = rendered.pixels[i];
    p = p < lo ? lo : (p > hi ? hi : p);
    sum += obs.pixels[i] ? std::log(p) : std::log1p(-p);
  }
  return sum;
}

}  // namespace wreath
