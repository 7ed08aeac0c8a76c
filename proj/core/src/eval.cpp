#include "wreath/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "wreath/errors.hpp"

namespace wreath {

RenderConfig equivalence_probe_config() {
  RenderConfig cfg;
  cfg.width = 512;
  cfg.height = 512;
  cfg.scale = 50.0;
  cfg.stroke_width = 1.0;
  cfg.supersample = 2;
  return cfg;
}

namespace {

bool structurally_valid(const Shape& s) {
  try {
    validate_shape(s, 1 << 20);  // no level-count opinion here
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

std::vector<bool> probe_mask(const Shape& s, const RenderConfig& cfg) {
  const Raster r = rasterize(unfold(s, nullptr, cfg), cfg);
  std::vector<bool> mask(r.pixels.size());
  for (std::size_t i = 0; i < r.pixels.size(); ++i) mask[i] = r.pixels[i] > 0.5;
  return mask;
}

}  // namespace

bool equivalent(const Shape& a, const Shape& b) {
  const Shape ca = canonicalize(a);
  const Shape cb = canonicalize(b);
  if (ca == cb) return true;
  if (ca.level_count() != cb.level_count()) return false;
  if (!structurally_valid(ca) || !structurally_valid(cb)) return false;
  const RenderConfig probe = equivalence_probe_config();
  try {
    return probe_mask(ca, probe) == probe_mask(cb, probe);
  } catch (const UnfoldError&) {
    return false;
  }
}

Shape relax_occupancy(const Shape& s) {
  Shape out = s;
  for (Level& lv : out.levels) {
    switch (lv.group.kind) {
      case GroupKind::TransX:
      case GroupKind::TransY:
        lv.occ = Occupancy::interval(-0.5, 0.5);
        break;
      case GroupKind::Scale:
        break;  // unbounded index set: nothing to saturate
      default:
        lv.occ = Occupancy::full();
        break;
    }
  }
  return out;
}

Shape complete_finite_occupancies(const Shape& s) {
  Shape out = s;
  for (Level& lv : out.levels)
    if (lv.group.kind == GroupKind::Rot || lv.group.kind == GroupKind::Mirror)
      lv.occ = Occupancy::full();
  return out;
}

double render_iou(const Shape& a, double lambda_a, const Shape& b,
                  double lambda_b, const RenderConfig& cfg) {
  const auto mask = [&cfg](const Shape& s, double lambda) {
    RenderConfig rc = cfg;
    rc.scale = lambda;
    return rasterize(unfold(s, nullptr, rc), rc);
  };
  Raster ma, mb;
  try {
    ma = mask(a, lambda_a);
    mb = mask(b, lambda_b);
  } catch (const UnfoldError&) {
    return 0.0;
  }
  long long inter = 0, uni = 0;
  for (std::size_t i = 0; i < ma.pixels.size(); ++i) {
    const bool pa = ma.pixels[i] > 0.5;  // plain coverage threshold, no
    const bool pb = mb.pixels[i] > 0.5;  // polarity heuristics
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

EvalResult recoverability(const Shape& inferred, const Shape& truth,
                          double lambda_inferred, double lambda_truth,
                          const RenderConfig& cfg) {
  EvalResult r;
  r.full_recoverability = equivalent(inferred, truth);
  r.up_to_occupancy =
      r.full_recoverability ||
      equivalent(relax_occupancy(inferred), relax_occupancy(truth));
  r.render_iou =
      render_iou(inferred, lambda_inferred, truth, lambda_truth, cfg);
  return r;
}

EvalSummary batch_evaluate(const std::vector<EvalResult>& items) {
  if (items.empty())
    throw std::invalid_argument("batch_evaluate: empty batch");
  EvalSummary s;
  s.count = static_cast<int>(items.size());
  for (const EvalResult& it : items) {
    s.full_fraction += it.full_recoverability ? 1.0 : 0.0;
    s.up_to_occupancy_fraction += it.up_to_occupancy ? 1.0 : 0.0;
    s.mean_render_iou += it.render_iou;
  }
  s.full_fraction /= s.count;
  s.up_to_occupancy_fraction /= s.count;
  s.mean_render_iou /= s.count;
  return s;
}

std::vector<DatasetItem> make_dataset(int count, std::uint64_t seed,
                                      const PriorConfig& prior,
                                      const RenderConfig& render) {
  std::vector<DatasetItem> items;
  items.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    DatasetItem item;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      item.shape = sample_shape_prior(rng, prior);
      item.hyper = sample_hyper(item.shape, rng, prior.noise);
      item.noise =
          sample_noise(item.shape, item.hyper, rng, render.control_points);
      item.blur = sample_blur(rng, prior);
      item.lambda = sample_lambda(rng, prior);
      RenderConfig rc = render;
      rc.scale = item.lambda;
      try {
        item.rendered = wreath::render(item.shape, &item.noise, item.blur, rc);
      } catch (const UnfoldError&) {
        continue;
      }
      item.binary = binarize(item.rendered);
      ok = item.binary.ink_count() > 0;
    }
    if (!ok)
      throw PriorSamplingError("could not draw an inked dataset item");
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace wreath
