#pragma once

#include <cstdint>
#include <vector>

#include "wreath/likelihood.hpp"
#include "wreath/priors.hpp"

namespace wreath {

/// Canvas used by the render-based equivalence probe: large and fine enough
/// that distinct small shapes land on distinct pixel sets (512x512, 50 px per
/// model unit, 1 px strokes).
RenderConfig equivalence_probe_config();

/// True if the two shapes generate the same figure: equal after
/// canonicalization, or same level count and pixel-identical noiseless
/// rasterizations (binarized at 0.5) on the probe canvas. The render clause
/// only applies to structurally valid shapes whose unfolding stays within the
/// point budget.
bool equivalent(const Shape& a, const Shape& b);

/// Saturate every occupancy to its group's full index set: Full on finite
/// groups and the continuous rotation, the unit interval on translations.
/// Scale levels keep their occupancy (their index set is unbounded). The
/// result describes the group tower only and need not be a renderable shape.
Shape relax_occupancy(const Shape& s);

/// Complete the finite-group levels (discrete rotations, mirrors) to Full,
/// leaving translations, continuous rotations, and scales untouched: the
/// symmetry-completion operator.
Shape complete_finite_occupancies(const Shape& s);

/// Intersection-over-union of the noiseless renders thresholded at 0.5, each
/// shape drawn at its own scale on a shared canvas. Empty union compares
/// equal (1.0); a shape whose unfolding blows the point budget scores 0.0.
double render_iou(const Shape& a, double lambda_a, const Shape& b,
                  double lambda_b, const RenderConfig& cfg);

/// Recovery verdict for one inferred shape against its ground truth.
struct EvalResult {
  bool full_recoverability = false;  // equivalent(inferred, truth)
  bool up_to_occupancy = false;      // equivalent after saturating occupancies
  double render_iou = 0.0;           // diagnostic only
};

EvalResult recoverability(const Shape& inferred, const Shape& truth,
                          double lambda_inferred, double lambda_truth,
                          const RenderConfig& cfg);

struct EvalSummary {
  int count = 0;
  double full_fraction = 0.0;
  double up_to_occupancy_fraction = 0.0;
  double mean_render_iou = 0.0;
};

/// Aggregate per-item verdicts; throws std::invalid_argument on an empty
/// batch.
EvalSummary batch_evaluate(const std::vector<EvalResult>& items);

/// One synthetic inference problem: latents drawn from the prior, rendered
/// and thresholded.
struct DatasetItem {
  Shape shape;
  NoiseHyper hyper;
  NoiseTree noise;
  BlurParams blur;
  double lambda = 10.0;
  Raster rendered;     // blurred intensity image
  BinaryImage binary;  // thresholded observation
};

/// Draw `count` items from the prior. Item i uses its own deterministic
/// stream seeded by seed+i, and redraws until the thresholded image contains
/// ink and the unfolding stays within budget.
std::vector<DatasetItem> make_dataset(int count, std::uint64_t seed,
                                      const PriorConfig& prior,
                                      const RenderConfig& render);

}  // namespace wreath
