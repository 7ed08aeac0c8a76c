#pragma once

#include <optional>
#include <vector>

#include "wreath/grammar.hpp"
#include "wreath/random.hpp"

namespace wreath {

/// Default number of noise control points per continuous stroke (K).
inline constexpr int kControlPoints = 8;

/// Per-level noise scales. sigma[i] is set for noise-bearing levels
/// (translations and rotations) and empty for mirror/scale levels, which are
/// rigid: their copies differ only through the noise of the levels below.
struct NoiseHyper {
  std::vector<std::optional<double>> sigma;
};

/// Per-copy, per-element perturbations. levels[i] holds one entry per copy
/// coordinate of the levels above i (mixed radix, level i+2 (0-based i+1)
/// varying fastest); an entry carries one scalar per occupied element at a
/// discrete level, or K control-point values at a continuous one. Translation
/// noise is a plain offset; rotation noise is an angle. Mirror/scale levels
/// hold no entries.
struct NoiseTree {
  std::vector<std::vector<std::vector<double>>> levels;
};

/// Prior over the per-level noise scales: sigma_trans ~ Gamma(1, 20),
/// sigma_rot ~ Gamma(pi/n, n^2), shape-rate by default. The continuous
/// rotation group has no order; it borrows rotfull_order.
struct NoisePriorConfig {
  bool gamma_by_rate = true;  // false: read the second parameter as a scale
  int rotfull_order = 8;
};

bool level_carries_noise(const GroupSpec& g);

/// Copies of level `level_index` (0-based) demanded by the levels above it:
/// the product of their element counts (continuous levels count 1).
long long noise_entry_count(const Shape& s, int level_index);

/// Scalars per entry at this level: element count, or K if continuous.
int noise_entry_width(const Level& lv, int control_points);

std::optional<double> sample_hyper_level(const GroupSpec& g, Rng& rng,
                                         const NoisePriorConfig& cfg = {});
double log_prior_hyper_level(const GroupSpec& g, double sigma,
                             const NoisePriorConfig& cfg = {});

NoiseHyper sample_hyper(const Shape& s, Rng& rng,
                        const NoisePriorConfig& cfg = {});
double log_prior_hyper(const Shape& s, const NoiseHyper& h,
                       const NoisePriorConfig& cfg = {});

/// Draw a full noise tree: iid N(0, sigma_i) offsets on translation levels,
/// von Mises (kappa = sigma_i^-2) angles on rotation levels, level by level,
/// entry by entry, element by element.
NoiseTree sample_noise(const Shape& s, const NoiseHyper& h, Rng& rng,
                       int control_points = kControlPoints);

/// Resample only the draws of one level (0-based) in place.
void resample_noise_level(const Shape& s, const NoiseHyper& h, NoiseTree& t,
                          int level_index, Rng& rng,
                          int control_points = kControlPoints);

/// Joint log density of all draws in the tree under the given scales.
/// Throws ShapeMismatchError if the tree's layout does not match the shape.
double log_density_noise(const Shape& s, const NoiseHyper& h,
                         const NoiseTree& t,
                         int control_points = kControlPoints);

/// Log density of one level's draws (0 for levels that carry none).
double log_density_noise_level(const Shape& s, const NoiseHyper& h,
                               const NoiseTree& t, int level_index,
                               int control_points = kControlPoints);

void check_noise_shape(const Shape& s, const NoiseTree& t, int control_points);

/// Modified Bessel function of the first kind, order zero. Power series up to
/// x = 50 (relative error < 1e-10), asymptotic expansion beyond.
double bessel_i0(double x);
double log_bessel_i0(double x);

/// Mean-zero von Mises log density: kappa*cos(eps) - log(2*pi*I0(kappa)).
double log_von_mises_pdf(double eps, double kappa);
double log_normal_pdf(double eps, double sigma);
/// Shape-rate Gamma log density.
double log_gamma_pdf(double x, double shape, double rate);

}  // namespace wreath
