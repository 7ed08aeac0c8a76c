#pragma once

#include <cstdint>
#include <random>

namespace wreath {

/// Deterministic random source. All variates are derived from the raw
/// mt19937_64 stream through fixed, library-version-independent algorithms, so
/// a given seed yields the same draw sequence on every platform/stdlib. Never
/// use std::*_distribution here: their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b);
  /// Uniform on (0, 1].
  double uniform_pos();
  /// Uniform integer in [0, n); n >= 1. Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  long long uniform_int(long long lo, long long hi);
  /// True with probability p.
  bool bernoulli(double p);

  /// Standard normal via Box-Muller (one variate per call, no cached spare).
  double normal();
  double normal(double mean, double sd);
  /// Exponential with rate 1.
  double exponential();
  /// Gamma in the shape/rate parametrization (Marsaglia-Tsang).
  double gamma(double shape, double rate);
  /// Beta(a, b) via two gammas.
  double beta(double a, double b);
  /// Von Mises with mean 0 and concentration kappa, result in (-pi, pi].
  /// Best-Fisher rejection; falls back to wrapped-normal for huge kappa.
  double von_mises(double kappa);

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wreath
