#pragma once

#include <vector>

#include "wreath/geometry.hpp"
#include "wreath/grammar.hpp"
#include "wreath/wreath_process.hpp"

namespace wreath {

/// Geometric primitives produced by unfolding, in model coordinates (y up).
struct Stroke {
  enum class Kind { Dot, Polyline, Circle };
  Kind kind = Kind::Dot;
  std::vector<Point> points;  // Dot: exactly 1; Polyline: >= 2
  Point center{};             // Circle
  double radius = 0.0;        // Circle
  bool closed = false;        // Polyline: connect last point back to first
};

using StrokeSet = std::vector<Stroke>;

/// Grayscale image, intensities in [0,1], row-major, y down.
struct Raster {
  int width = 0, height = 0;
  std::vector<double> pixels;

  Raster() = default;
  Raster(int w, int h) : width(w), height(h),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0) {}
  double& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  double at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

struct RenderConfig {
  int width = 64, height = 64;
  double scale = 10.0;        // lambda: model units per ... pixels per model unit
  double stroke_width = 1.5;  // stroke diameter, pixels
  int supersample = 2;        // coverage samples per pixel edge
  int control_points = kControlPoints;  // K, noise knots per continuous stroke
};

/// Separable truncated-Gaussian blur: half_width taps each side (2w+1 total),
/// kernel normalized, edges clamped. half_width == 0 is the identity.
struct BlurParams {
  int half_width = 0;
  double sigma = 1.0;
};

/// Expand the shape into concrete strokes. Level 1 acts first on the origin
/// dot; each upper level stamps out copies of everything below, reading each
/// copy's perturbations from the noise tree (pass nullptr for the noiseless
/// unfolding). A continuous level turns the point fiber below it into one
/// stroke: an interval sweeps a segment (K control points displaced along the
/// axis by eps/sqrt(K) when noisy), a fully-occupied continuous rotation
/// sweeps a circle around the origin (radial jitter interpolated from K knots
/// when noisy). Throws UnfoldError past ~1e6 points.
StrokeSet unfold(const Shape& s, const NoiseTree* noise = nullptr,
                 const RenderConfig& cfg = {});

/// Coverage rasterization: a point is inked if it lies within stroke_width/2
/// (pixels) of a stroke's geometry; coverage is averaged over supersample^2
/// samples per pixel. Model coords map by px = W/2 + scale*x, py = H/2 - scale*y.
Raster rasterize(const StrokeSet& strokes, const RenderConfig& cfg = {});

Raster gaussian_blur(const Raster& img, int half_width, double sigma);
inline Raster gaussian_blur(const Raster& img, const BlurParams& b) {
  return gaussian_blur(img, b.half_width, b.sigma);
}

/// unfold + rasterize + blur.
Raster render(const Shape& s, const NoiseTree* noise, const BlurParams& blur,
              const RenderConfig& cfg = {});

}  // namespace wreath
