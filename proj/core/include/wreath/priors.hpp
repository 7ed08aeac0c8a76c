#pragma once

#include <vector>

#include "wreath/grammar.hpp"
#include "wreath/random.hpp"
#include "wreath/renderer.hpp"
#include "wreath/wreath_process.hpp"

namespace wreath {

/// Generative prior over shapes, blur, and model scale.
///
/// Level count ~ U{1..max_levels}. Each level, innermost first: family
/// uniform over {Trans X, Trans Y, Rot, Mirror}; a Rot level picks its order
/// uniformly from rot_orders plus (when rot_continuous) the continuous
/// rotation group. Occupancy: single element w.p. p_single, everything w.p.
/// p_full, else an independent-inclusion subset retried until nonempty.
/// Translation elements are integers through the B mechanism (B ~ U{1..b_max},
/// then U{-B..B} / inclusion w.p. 1/(2B+1)); "everything" on a translation is
/// the unit interval [-0.5, 0.5]. A draw that would put a continuous
/// occupancy above a non-point fiber is redrawn (per-level rejection), which
/// renormalizes that level's law by an exactly computable constant. Scale
/// levels are outside the prior entirely.
struct PriorConfig {
  int max_levels = kMaxLevels;
  double p_single = 0.4;
  double p_full = 0.4;
  int b_max = 5;
  std::vector<int> rot_orders = {2, 3, 4, 5, 6, 8};
  bool rot_continuous = true;
  int rotfull_special_max = 4;  // max angle count for a subset draw
  double b_w = 6.0;             // blur window scale, pixels
  double b_sigma = 2.0;         // blur sigma scale, pixels
  double lambda_min = 1.0;
  double lambda_max = 50.0;
  NoisePriorConfig noise;
};

Shape sample_shape_prior(Rng& rng, const PriorConfig& cfg = {});

/// Exact log prior mass/density of a shape; -inf for shapes the prior cannot
/// produce (scale levels, non-integer translation elements, orders outside
/// rot_orders, invalid structures, ...).
double log_prior_shape(const Shape& s, const PriorConfig& cfg = {});

/// One level of the prior, exposed for the trans-dimensional proposals.
/// prefix_point: whether everything below the level is a single point.
/// force_point: restrict to single-element occupancies (used when a level
/// above keeps a continuous occupancy); the law is then family ~ menu,
/// element ~ its single-element law.
Level sample_level_prior(Rng& rng, const PriorConfig& cfg, bool prefix_point,
                         bool force_point);
double log_level_prior(const Level& lv, const PriorConfig& cfg,
                       bool prefix_point, bool force_point);

/// The occupancy part of the level law for a fixed group (the
/// single/full/subset mode mixture, no validity renormalization). Used by the
/// occupancy-redraw proposal.
Occupancy sample_occupancy_prior(const GroupSpec& g, Rng& rng,
                                 const PriorConfig& cfg);
double log_occupancy_prior(const GroupSpec& g, const Occupancy& occ,
                           const PriorConfig& cfg);

/// Blur prior: half_width = round(b_w * Beta(1,2)) scored by the exact mass
/// of the rounding cell; sigma = b_sigma * Exp(1).
BlurParams sample_blur(Rng& rng, const PriorConfig& cfg = {});
double log_prior_blur(const BlurParams& b, const PriorConfig& cfg = {});

/// Model scale lambda ~ U[lambda_min, lambda_max].
double sample_lambda(Rng& rng, const PriorConfig& cfg = {});
double log_prior_lambda(double lambda, const PriorConfig& cfg = {});

}  // namespace wreath
