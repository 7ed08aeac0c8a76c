#include "wreath/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "wreath/errors.hpp"

namespace wreath {

namespace {

constexpr std::size_t kRasterCacheSize = 32;

// --- small utilities -------------------------------------------------------

bool is_single_discrete(const Occupancy& o) {
  return o.kind == OccKind::Discrete && o.values.size() == 1;
}

// Truncated geometric over {0..count-1}: P(j) proportional to decay^j.
int sample_trunc_geom(Rng& rng, int count, double decay) {
  double z = 0.0, w = 1.0;
  for (int j = 0; j < count; ++j, w *= decay) z += w;
  double u = rng.uniform() * z;
  w = 1.0;
  for (int j = 0; j < count; ++j, w *= decay) {
    if (u < w) return j;
    u -= w;
  }
  return count - 1;
}

double log_trunc_geom(int j, int count, double decay) {
  double z = 0.0, w = 1.0;
  for (int k = 0; k < count; ++k, w *= decay) z += w;
  return j * std::log(decay) - std::log(z);
}

double draw_perturbation(const GroupSpec& g, double sigma, Rng& rng) {
  if (g.kind == GroupKind::Rot || g.kind == GroupKind::RotFull)
    return rng.von_mises(1.0 / (sigma * sigma));
  return rng.normal(0.0, sigma);
}

double log_perturbation(const GroupSpec& g, double sigma, double eps) {
  if (g.kind == GroupKind::Rot || g.kind == GroupKind::RotFull)
    return log_von_mises_pdf(eps, 1.0 / (sigma * sigma));
  return log_normal_pdf(eps, sigma);
}

// --- within-shape sub-move menu --------------------------------------------

enum class Sub { Toggle, Shift, Redraw, GroupStep };

// Neighboring rotation orders along sorted rot_orders (plus the continuous
// group as the top rung), filtered to those the current occupancy survives.
// The continuous hop is only offered for Full occupancies: discrete indices
// and discrete angles are not interconvertible.
std::vector<GroupSpec> group_step_targets(const Level& lv,
                                          const PriorConfig& cfg) {
  std::vector<GroupSpec> out;
  if (lv.group.kind == GroupKind::TransX) {
    out.push_back(GroupSpec::trans(Axis::Y));
    return out;
  }
  if (lv.group.kind == GroupKind::TransY) {
    out.push_back(GroupSpec::trans(Axis::X));
    return out;
  }
  if (lv.group.kind != GroupKind::Rot && lv.group.kind != GroupKind::RotFull)
    return out;

  std::vector<int> orders = cfg.rot_orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  const int n_fin = static_cast<int>(orders.size());

  const auto occupancy_fits = [&](int order) {
    if (lv.occ.kind == OccKind::Full) return true;
    if (lv.occ.kind != OccKind::Discrete) return false;
    return lv.occ.values.back() < static_cast<double>(order);
  };

  if (lv.group.kind == GroupKind::RotFull) {
    if (lv.occ.kind == OccKind::Full && n_fin > 0)
      out.push_back(GroupSpec::rot(orders.back()));
    return out;
  }

  const auto it = std::find(orders.begin(), orders.end(), lv.group.order);
  if (it == orders.end()) return out;  // order off the menu: no ladder
  const int pos = static_cast<int>(it - orders.begin());
  if (pos > 0 && occupancy_fits(orders[static_cast<std::size_t>(pos - 1)]))
    out.push_back(GroupSpec::rot(orders[static_cast<std::size_t>(pos - 1)]));
  if (pos + 1 < n_fin)
    out.push_back(GroupSpec::rot(orders[static_cast<std::size_t>(pos + 1)]));
  else if (cfg.rot_continuous && lv.occ.kind == OccKind::Full)
    out.push_back(GroupSpec::rot_full());
  return out;
}

struct Menu {
  double p_toggle = 0, p_shift = 0, p_redraw = 0, p_group = 0;
  double prob(Sub s) const {
    switch (s) {
      case Sub::Toggle: return p_toggle;
      case Sub::Shift: return p_shift;
      case Sub::Redraw: return p_redraw;
      case Sub::GroupStep: return p_group;
    }
    return 0;
  }
};

Menu submove_menu(const Level& lv, const PriorConfig& cfg) {
  const bool finite_index =
      lv.group.kind == GroupKind::Rot || lv.group.kind == GroupKind::Mirror;
  const bool trans =
      lv.group.kind == GroupKind::TransX || lv.group.kind == GroupKind::TransY;
  bool shiftable = trans && lv.occ.kind == OccKind::Discrete;
  if (shiftable)
    for (const double v : lv.occ.values)
      if (v != std::floor(v)) shiftable = false;

  Menu m;
  if (finite_index && lv.occ.kind == OccKind::Discrete) m.p_toggle = 0.30;
  if (shiftable) m.p_shift = 0.30;
  m.p_redraw = 0.25;
  if (!group_step_targets(lv, cfg).empty()) m.p_group = 0.15;
  const double z = m.p_toggle + m.p_shift + m.p_redraw + m.p_group;
  m.p_toggle /= z;
  m.p_shift /= z;
  m.p_redraw /= z;
  m.p_group /= z;
  return m;
}

Sub sample_submove(const Menu& m, Rng& rng) {
  const double u = rng.uniform();
  if (u < m.p_toggle) return Sub::Toggle;
  if (u < m.p_toggle + m.p_shift) return Sub::Shift;
  if (u < m.p_toggle + m.p_shift + m.p_redraw) return Sub::Redraw;
  return Sub::GroupStep;
}

// --- noise transplanting ----------------------------------------------------

struct Transplanted {
  NoiseTree tree;
  double logq_fwd = 0.0;  // density of the fresh draws
  double logq_bwd = 0.0;  // density of the dropped old draws
};

// Element-index correspondence old->new for a mutated level: new element j of
// nlv maps to map[j] in olv (or -1 = fresh). Elements are identified by their
// occupied value (Full on a finite group enumerates 0..count-1); a level with
// one opaque copy on both sides (continuous or otherwise) maps 0 -> 0.
std::vector<int> element_map(const Level& olv, const Level& nlv) {
  const int nc = nlv.occ.copy_count(nlv.group);
  const int oc = olv.occ.copy_count(olv.group);
  std::vector<int> map(static_cast<std::size_t>(nc), -1);
  const bool ocont = olv.occ.continuous_on(olv.group);
  const bool ncont = nlv.occ.continuous_on(nlv.group);
  if (ocont || ncont) {
    if (nc == 1 && oc == 1) map[0] = 0;
    return map;
  }
  const auto value_of = [](const Level& lv, int e) {
    return lv.occ.kind == OccKind::Discrete
               ? lv.occ.values[static_cast<std::size_t>(e)]
               : static_cast<double>(e);
  };
  for (int j = 0; j < nc; ++j) {
    const double v = value_of(nlv, j);
    for (int e = 0; e < oc; ++e)
      if (value_of(olv, e) == v) {
        map[static_cast<std::size_t>(j)] = e;
        break;
      }
  }
  return map;
}

// Rebuild the noise tree after mutating level `idx` of old_s into new_s
// (all other levels equal). Draws survive wherever their element-value
// coordinates survive; fresh ones are drawn from the (kept) per-level sigma.
Transplanted transplant_within(const Shape& old_s, const Shape& new_s,
                               const NoiseTree& old_t, const NoiseHyper& hyper,
                               int idx, int control_points, Rng& rng) {
  const int n = new_s.level_count();
  const Level& olv = old_s.levels[static_cast<std::size_t>(idx)];
  const Level& nlv = new_s.levels[static_cast<std::size_t>(idx)];
  Transplanted r;
  r.tree.levels.resize(static_cast<std::size_t>(n));

  // Levels above the mutation are untouched.
  for (int m = idx + 1; m < n; ++m)
    r.tree.levels[static_cast<std::size_t>(m)] =
        old_t.levels[static_cast<std::size_t>(m)];

  const std::vector<int> emap = element_map(olv, nlv);
  const int nc = nlv.occ.copy_count(nlv.group);
  const int oc = olv.occ.copy_count(olv.group);
  std::vector<char> old_used(static_cast<std::size_t>(oc), 0);
  for (const int e : emap)
    if (e >= 0) old_used[static_cast<std::size_t>(e)] = 1;

  // The mutated level's own entries (indexed by the unchanged levels above).
  {
    auto& dst = r.tree.levels[static_cast<std::size_t>(idx)];
    const auto& src = old_t.levels[static_cast<std::size_t>(idx)];
    const bool ncar = level_carries_noise(nlv.group);
    const bool ocar = level_carries_noise(olv.group);
    const long long entries = noise_entry_count(new_s, idx);
    const int nw = ncar ? noise_entry_width(nlv, control_points) : 0;
    const int ow = ocar ? noise_entry_width(olv, control_points) : 0;
    // Per-element transfer only holds between discrete sides of equal width
    // semantics; continuous sides either persist whole (level unchanged) or
    // start over.
    const bool level_equal = olv == nlv;
    const bool ncont = ncar && nlv.occ.continuous_on(nlv.group);
    const bool ocont = ocar && olv.occ.continuous_on(olv.group);
    const double sig =
        ncar ? hyper.sigma[static_cast<std::size_t>(idx)].value() : 0.0;
    const double osig =
        ocar ? hyper.sigma[static_cast<std::size_t>(idx)].value() : 0.0;
    if (ncar) dst.assign(static_cast<std::size_t>(entries), {});
    for (long long e = 0; e < entries; ++e) {
      if (ncar) {
        auto& vec = dst[static_cast<std::size_t>(e)];
        vec.resize(static_cast<std::size_t>(nw));
        for (int j = 0; j < nw; ++j) {
          if (level_equal) {
            vec[static_cast<std::size_t>(j)] =
                src[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)];
          } else if (!ncont && !ocont && ocar &&
                     j < static_cast<int>(emap.size()) &&
                     emap[static_cast<std::size_t>(j)] >= 0) {
            vec[static_cast<std::size_t>(j)] =
                src[static_cast<std::size_t>(e)]
                   [static_cast<std::size_t>(emap[static_cast<std::size_t>(j)])];
          } else {
            const double x = draw_perturbation(nlv.group, sig, rng);
            vec[static_cast<std::size_t>(j)] = x;
            r.logq_fwd += log_perturbation(nlv.group, sig, x);
          }
        }
      }
      if (ocar && !level_equal) {
        // Score dropped old draws.
        for (int j = 0; j < ow; ++j) {
          const bool kept = !ncont && !ocont && ncar &&
                            std::find(emap.begin(), emap.end(), j) != emap.end();
          if (!kept)
            r.logq_bwd += log_perturbation(
                olv.group, osig,
                src[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)]);
        }
      }
    }
  }

  // Levels below the mutation: an entry coordinate at level m factors as
  // lo + stride*(digit_at_idx + count_at_idx*hi), with stride the product of
  // copy counts of the levels strictly between m and idx. Only the middle
  // digit is remapped; lo and hi pass through unchanged.
  const long long high = noise_entry_count(new_s, idx);
  long long stride = 1;
  for (int m = idx - 1; m >= 0; --m) {
    const Level& lv = new_s.levels[static_cast<std::size_t>(m)];
    if (level_carries_noise(lv.group)) {
      const int width = noise_entry_width(lv, control_points);
      const double sig = hyper.sigma[static_cast<std::size_t>(m)].value();
      const auto& src = old_t.levels[static_cast<std::size_t>(m)];
      auto& dst = r.tree.levels[static_cast<std::size_t>(m)];
      dst.assign(static_cast<std::size_t>(stride * nc * high), {});
      for (long long h = 0; h < high; ++h) {
        for (int j = 0; j < nc; ++j) {
          const int oj = emap[static_cast<std::size_t>(j)];
          for (long long lo = 0; lo < stride; ++lo) {
            const long long nf =
                lo + stride * (j + static_cast<long long>(nc) * h);
            auto& vec = dst[static_cast<std::size_t>(nf)];
            if (oj >= 0) {
              const long long of =
                  lo + stride * (oj + static_cast<long long>(oc) * h);
              vec = src[static_cast<std::size_t>(of)];
            } else {
              vec.resize(static_cast<std::size_t>(width));
              for (double& x : vec) {
                x = draw_perturbation(lv.group, sig, rng);
                r.logq_fwd += log_perturbation(lv.group, sig, x);
              }
            }
          }
        }
        // Subtrees hanging off elements that did not survive are dropped;
        // score them for the reverse draw.
        for (int e = 0; e < oc; ++e) {
          if (old_used[static_cast<std::size_t>(e)]) continue;
          for (long long lo = 0; lo < stride; ++lo) {
            const long long of =
                lo + stride * (e + static_cast<long long>(oc) * h);
            for (const double x : src[static_cast<std::size_t>(of)])
              r.logq_bwd += log_perturbation(lv.group, sig, x);
          }
        }
      }
    }
    stride *= lv.occ.copy_count(lv.group);
  }

  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(const BinaryImage* obs, PriorConfig prior, RenderConfig render,
                 ChainConfig chain)
    : obs_(obs),
      prior_(std::move(prior)),
      render_(render),
      chain_(std::move(chain)) {}

namespace {

std::string raster_cache_key(const Shape& s, const NoiseTree& t, double lambda) {
  std::string key = serialize_shape(s);
  key += '\0';
  const auto push = [&key](double v) {
    char b[sizeof(double)];
    std::memcpy(b, &v, sizeof(double));
    key.append(b, sizeof(double));
  };
  push(lambda);
  for (const auto& level : t.levels)
    for (const auto& entry : level)
      for (const double v : entry) push(v);
  return key;
}

}  // namespace

double Sampler::cached_raster(const ModelState& st, Raster* out) {
  const std::string key = raster_cache_key(st.shape, st.noise, st.lambda);
  if (const auto it = lru_index_.find(key); it != lru_index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    if (it->second->overflow) return 0.0;
    *out = it->second->raster;
    return 1.0;
  }
  CacheEntry e;
  e.key = key;
  RenderConfig rc = render_;
  rc.scale = st.lambda;
  try {
    e.raster = rasterize(unfold(st.shape, &st.noise, rc), rc);
  } catch (const UnfoldError&) {
    e.overflow = true;
  }
  lru_.push_front(std::move(e));
  lru_index_[key] = lru_.begin();
  if (lru_.size() > kRasterCacheSize) {
    lru_index_.erase(lru_.back().key);
    lru_.pop_back();
  }
  if (lru_.front().overflow) return 0.0;
  *out = lru_.front().raster;
  return 1.0;
}

double Sampler::rerender(ModelState& st) {
  if (!obs_) {
    st.raster = Raster{};
    st.rendered = Raster{};
    st.log_lik = 0.0;
    return 0.0;
  }
  if (cached_raster(st, &st.raster) == 0.0) {
    st.raster = Raster{};
    st.rendered = Raster{};
    st.log_lik = -INFINITY;
    return st.log_lik;
  }
  st.rendered = gaussian_blur(st.raster, st.blur);
  st.log_lik = log_likelihood(*obs_, st.rendered, chain_.p_min);
  return st.log_lik;
}

ModelState Sampler::make_state(Shape s, NoiseHyper h, NoiseTree t, BlurParams b,
                               double lambda) {
  ModelState st;
  st.shape = std::move(s);
  st.hyper = std::move(h);
  st.noise = std::move(t);
  st.blur = b;
  st.lambda = lambda;
  st.log_prior = log_prior_shape(st.shape, prior_);
  if (st.log_prior == -INFINITY) {
    st.log_lik = 0.0;  // posterior is -inf regardless; skip rendering
    return st;
  }
  st.log_prior += log_prior_hyper(st.shape, st.hyper, prior_.noise) +
                  log_density_noise(st.shape, st.hyper, st.noise,
                                    render_.control_points) +
                  log_prior_blur(st.blur, prior_) +
                  log_prior_lambda(st.lambda, prior_);
  rerender(st);
  return st;
}

ModelState Sampler::init_state(Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Shape s = sample_shape_prior(rng, prior_);
    NoiseHyper h = sample_hyper(s, rng, prior_.noise);
    NoiseTree t = sample_noise(s, h, rng, render_.control_points);
    BlurParams b = sample_blur(rng, prior_);
    const double lambda = sample_lambda(rng, prior_);
    ModelState st = make_state(std::move(s), std::move(h), std::move(t), b, lambda);
    if (std::isfinite(st.log_posterior())) return st;
  }
  throw PriorSamplingError("could not initialize a finite-posterior state");
}

double acceptance_probability(const ModelState& current, const Proposal& p) {
  if (!p.valid) return 0.0;
  const double lp_new = p.state.log_posterior();
  if (lp_new == -INFINITY) return 0.0;
  const double delta = lp_new - current.log_posterior() + p.correction;
  if (delta >= 0.0) return 1.0;
  if (delta == -INFINITY) return 0.0;
  return std::exp(delta);
}

// ---------------------------------------------------------------------------
// Proposals

Proposal Sampler::propose_noise(const ModelState& cur, Rng& rng) {
  std::vector<int> bearing;
  for (int i = 0; i < cur.shape.level_count(); ++i)
    if (level_carries_noise(cur.shape.levels[static_cast<std::size_t>(i)].group))
      bearing.push_back(i);
  Proposal p;
  if (bearing.empty()) {
    p.state = cur;
    return p;  // nothing to do; accepted no-op
  }
  NoiseHyper h = cur.hyper;
  NoiseTree t = cur.noise;
  double qf = 0.0, qb = 0.0;
  if (rng.bernoulli(0.5)) {
    h = sample_hyper(cur.shape, rng, prior_.noise);
    t = sample_noise(cur.shape, h, rng, render_.control_points);
    qf = log_prior_hyper(cur.shape, h, prior_.noise) +
         log_density_noise(cur.shape, h, t, render_.control_points);
    qb = log_prior_hyper(cur.shape, cur.hyper, prior_.noise) +
         log_density_noise(cur.shape, cur.hyper, cur.noise,
                           render_.control_points);
  } else {
    const int lvl =
        bearing[static_cast<std::size_t>(rng.uniform_int(bearing.size()))];
    const GroupSpec& g = cur.shape.levels[static_cast<std::size_t>(lvl)].group;
    h.sigma[static_cast<std::size_t>(lvl)] =
        sample_hyper_level(g, rng, prior_.noise);
    resample_noise_level(cur.shape, h, t, lvl, rng, render_.control_points);
    qf = log_prior_hyper_level(g, *h.sigma[static_cast<std::size_t>(lvl)],
                               prior_.noise) +
         log_density_noise_level(cur.shape, h, t, lvl, render_.control_points);
    qb = log_prior_hyper_level(g, *cur.hyper.sigma[static_cast<std::size_t>(lvl)],
                               prior_.noise) +
         log_density_noise_level(cur.shape, cur.hyper, cur.noise, lvl,
                                 render_.control_points);
  }
  p.state = make_state(cur.shape, std::move(h), std::move(t), cur.blur, cur.lambda);
  p.correction = qb - qf;
  return p;
}

Proposal Sampler::propose_blur(const ModelState& cur, Rng& rng) {
  const BlurParams b = sample_blur(rng, prior_);
  Proposal p;
  p.state = make_state(cur.shape, cur.hyper, cur.noise, b, cur.lambda);
  p.correction = log_prior_blur(cur.blur, prior_) - log_prior_blur(b, prior_);
  return p;
}

Proposal Sampler::propose_lambda(const ModelState& cur, Rng& rng) {
  const double lambda = sample_lambda(rng, prior_);
  Proposal p;
  p.state = make_state(cur.shape, cur.hyper, cur.noise, cur.blur, lambda);
  p.correction =
      log_prior_lambda(cur.lambda, prior_) - log_prior_lambda(lambda, prior_);
  return p;
}

Proposal Sampler::propose_shape_within(const ModelState& cur, Rng& rng) {
  Proposal p;
  const int n = cur.shape.level_count();
  const int f = std::clamp(chain_.freeze_below_level, 0, n);
  const int pickable = n - f;
  if (pickable <= 0) {
    p.valid = false;
    return p;
  }
  const int idx = f + sample_trunc_geom(rng, pickable, chain_.level_decay);
  const Level& lv = cur.shape.levels[static_cast<std::size_t>(idx)];
  const Menu menu = submove_menu(lv, prior_);
  const Sub sub = sample_submove(menu, rng);

  Level nlv = lv;
  double internal_fwd = 0.0, internal_bwd = 0.0;

  switch (sub) {
    case Sub::Toggle: {
      const int count = lv.group.kind == GroupKind::Rot ? lv.group.order : 2;
      const double k = static_cast<double>(rng.uniform_int(
          static_cast<std::uint64_t>(count)));
      std::vector<double> vals = lv.occ.values;
      const auto it = std::find(vals.begin(), vals.end(), k);
      if (it != vals.end()) {
        vals.erase(it);
        if (vals.empty()) {
          p.valid = false;
          return p;
        }
      } else {
        vals.push_back(k);
      }
      nlv.occ = Occupancy::discrete(std::move(vals));
      break;  // pick probs 1/count cancel
    }
    case Sub::Shift: {
      std::vector<double> vals = lv.occ.values;
      const std::size_t e = rng.uniform_int(vals.size());
      const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const double target = vals[e] + dir;
      if (std::find(vals.begin(), vals.end(), target) != vals.end()) {
        p.valid = false;
        return p;
      }
      vals[e] = target;
      nlv.occ = Occupancy::discrete(std::move(vals));
      break;  // pick probs (1/size)(1/2) cancel
    }
    case Sub::Redraw: {
      nlv.occ = sample_occupancy_prior(lv.group, rng, prior_);
      internal_fwd = log_occupancy_prior(lv.group, nlv.occ, prior_);
      internal_bwd = log_occupancy_prior(lv.group, lv.occ, prior_);
      break;
    }
    case Sub::GroupStep: {
      const auto targets = group_step_targets(lv, prior_);
      if (targets.empty()) {
        p.valid = false;
        return p;
      }
      nlv.group = targets[static_cast<std::size_t>(
          rng.uniform_int(targets.size()))];
      if (nlv.group.kind == GroupKind::RotFull ||
          lv.group.kind == GroupKind::RotFull) {
        // Continuous hop keeps Full occupancy (guaranteed by the filter).
        nlv.occ = Occupancy::full();
      }
      internal_fwd = -std::log(static_cast<double>(targets.size()));
      const auto back = group_step_targets(nlv, prior_);
      bool reachable = false;
      for (const GroupSpec& g : back)
        if (g == lv.group) reachable = true;
      if (!reachable || back.empty()) {
        p.valid = false;  // asymmetric rung; refuse rather than bias
        return p;
      }
      internal_bwd = -std::log(static_cast<double>(back.size()));
      break;
    }
  }

  Shape ns = cur.shape;
  ns.levels[static_cast<std::size_t>(idx)] = nlv;
  try {
    validate_shape(ns, prior_.max_levels);
  } catch (const ValidationError&) {
    p.valid = false;
    return p;
  }

  const Menu back_menu = submove_menu(ns.levels[static_cast<std::size_t>(idx)],
                                      prior_);
  const double menu_fwd = menu.prob(sub);
  const double menu_bwd = back_menu.prob(sub);
  if (menu_bwd <= 0.0) {
    p.valid = false;
    return p;
  }

  Transplanted tr = transplant_within(cur.shape, ns, cur.noise, cur.hyper, idx,
                                      render_.control_points, rng);
  p.state = make_state(std::move(ns), cur.hyper, std::move(tr.tree), cur.blur,
                       cur.lambda);
  p.correction = (std::log(menu_bwd) + internal_bwd + tr.logq_bwd) -
                 (std::log(menu_fwd) + internal_fwd + tr.logq_fwd);
  return p;
}

Proposal Sampler::propose_shape_transdim(const ModelState& cur, Rng& rng) {
  Proposal p;
  if (chain_.freeze_below_level > 0) {
    p.valid = false;
    return p;
  }
  const int n = cur.shape.level_count();
  const double decay = chain_.level_decay;
  const int i = sample_trunc_geom(rng, n + 1, decay);  // levels 1..i replaced
  const int m_min = i == n ? 1 : 0;
  const int m_max = prior_.max_levels - (n - i);
  if (m_max < m_min) {
    p.valid = false;
    return p;
  }
  const int m = m_min + static_cast<int>(rng.uniform_int(
                            static_cast<std::uint64_t>(m_max - m_min + 1)));

  bool force_point = false;
  for (int k = i; k < n; ++k) {
    const Level& klv = cur.shape.levels[static_cast<std::size_t>(k)];
    if (klv.occ.continuous_on(klv.group)) force_point = true;
  }

  double qf = 0.0, qb = 0.0;
  // Segmentation / fiber-length choice probabilities, both directions.
  const int n_new = m + (n - i);
  qf += log_trunc_geom(i, n + 1, decay) -
        std::log(static_cast<double>(m_max - m_min + 1));
  const int bm_min = m == n_new ? 1 : 0;
  const int bm_max = prior_.max_levels - (n_new - m);
  qb += log_trunc_geom(m, n_new + 1, decay) -
        std::log(static_cast<double>(bm_max - bm_min + 1));

  // Fresh fiber, bottom-up.
  Shape ns;
  ns.levels.reserve(static_cast<std::size_t>(n_new));
  bool point = true;
  for (int j = 0; j < m; ++j) {
    Level lv = sample_level_prior(rng, prior_, point, force_point);
    qf += log_level_prior(lv, prior_, point, force_point);
    point = point && is_single_discrete(lv.occ);
    ns.levels.push_back(std::move(lv));
  }
  for (int k = i; k < n; ++k)
    ns.levels.push_back(cur.shape.levels[static_cast<std::size_t>(k)]);

  // Old fiber scored backward under the same regime.
  {
    bool opoint = true;
    for (int j = 0; j < i; ++j) {
      const Level& lv = cur.shape.levels[static_cast<std::size_t>(j)];
      qb += log_level_prior(lv, prior_, opoint, force_point);
      opoint = opoint && is_single_discrete(lv.occ);
    }
  }

  // Sigmas: fresh for the new fiber, kept for the suffix.
  NoiseHyper nh;
  nh.sigma.resize(static_cast<std::size_t>(n_new));
  for (int j = 0; j < m; ++j) {
    const GroupSpec& g = ns.levels[static_cast<std::size_t>(j)].group;
    nh.sigma[static_cast<std::size_t>(j)] =
        sample_hyper_level(g, rng, prior_.noise);
    if (nh.sigma[static_cast<std::size_t>(j)])
      qf += log_prior_hyper_level(g, *nh.sigma[static_cast<std::size_t>(j)],
                                  prior_.noise);
  }
  for (int k = i; k < n; ++k)
    nh.sigma[static_cast<std::size_t>(m + k - i)] =
        cur.hyper.sigma[static_cast<std::size_t>(k)];
  for (int j = 0; j < i; ++j) {
    const Level& lv = cur.shape.levels[static_cast<std::size_t>(j)];
    if (cur.hyper.sigma[static_cast<std::size_t>(j)])
      qb += log_prior_hyper_level(lv.group,
                                  *cur.hyper.sigma[static_cast<std::size_t>(j)],
                                  prior_.noise);
  }

  // Noise: fresh draws below, verbatim transplant above.
  NoiseTree nt;
  nt.levels.resize(static_cast<std::size_t>(n_new));
  for (int j = 0; j < m; ++j) {
    resample_noise_level(ns, nh, nt, j, rng, render_.control_points);
    qf += log_density_noise_level(ns, nh, nt, j, render_.control_points);
  }
  for (int k = i; k < n; ++k)
    nt.levels[static_cast<std::size_t>(m + k - i)] =
        cur.noise.levels[static_cast<std::size_t>(k)];
  for (int j = 0; j < i; ++j)
    qb += log_density_noise_level(cur.shape, cur.hyper, cur.noise, j,
                                  render_.control_points);

  try {
    validate_shape(ns, prior_.max_levels);
  } catch (const ValidationError&) {
    p.valid = false;
    return p;
  }
  p.state = make_state(std::move(ns), std::move(nh), std::move(nt), cur.blur,
                       cur.lambda);
  p.correction = qb - qf;
  return p;
}

// ---------------------------------------------------------------------------
// Chain loop

ChainResult Sampler::run(Rng& rng) {
  ModelState state = init_state(rng);
  ChainResult res;
  res.map_state = state;
  res.ml_state = state;

  const char* names[5] = {"noise", "blur", "lambda", "shape_within",
                          "shape_transdim"};
  double weights[5] = {chain_.weights.noise, chain_.weights.blur,
                       chain_.weights.lambda, chain_.weights.shape_within,
                       chain_.weights.shape_transdim};
  double wsum = 0.0;
  for (const double w : weights) wsum += w;
  long long proposed[5] = {0, 0, 0, 0, 0};
  long long accepted[5] = {0, 0, 0, 0, 0};

  const long long report = std::max<long long>(1, chain_.iterations / 20);
  for (long long it = 1; it <= chain_.iterations; ++it) {
    double u = rng.uniform() * wsum;
    int mv = 0;
    while (mv < 4 && u >= weights[mv]) {
      u -= weights[mv];
      ++mv;
    }
    Proposal prop;
    switch (mv) {
      case 0: prop = propose_noise(state, rng); break;
      case 1: prop = propose_blur(state, rng); break;
      case 2: prop = propose_lambda(state, rng); break;
      case 3: prop = propose_shape_within(state, rng); break;
      default: prop = propose_shape_transdim(state, rng); break;
    }
    ++proposed[mv];
    const double a = acceptance_probability(state, prop);
    bool take = false;
    if (a >= 1.0)
      take = true;
    else if (a > 0.0)
      take = rng.uniform() < a;
    if (take) {
      state = std::move(prop.state);
      ++accepted[mv];
      if (state.log_posterior() > res.map_state.log_posterior())
        res.map_state = state;
      if (state.log_lik > res.ml_state.log_lik) res.ml_state = state;
    }
    if (chain_.thin > 0 && it % chain_.thin == 0) {
      PosteriorSample smp;
      smp.iteration = it;
      smp.shape = state.shape;
      smp.blur = state.blur;
      smp.lambda = state.lambda;
      smp.log_posterior = state.log_posterior();
      smp.log_likelihood = state.log_lik;
      smp.hyper = state.hyper;
      if (chain_.keep_noise_in_samples) smp.noise = state.noise;
      res.samples.push_back(std::move(smp));
    }
    if (chain_.verbose && it % report == 0)
      std::fprintf(stderr, "iter %lld/%lld  logpost %.2f  levels %d\n", it,
                   chain_.iterations, state.log_posterior(),
                   state.shape.level_count());
  }

  res.iterations = chain_.iterations;
  for (int k = 0; k < 5; ++k)
    res.acceptance_rates.emplace_back(
        names[k], proposed[k] ? static_cast<double>(accepted[k]) /
                                    static_cast<double>(proposed[k])
                              : 0.0);
  return res;
}

ChainResult run_chain(const BinaryImage* obs, const PriorConfig& prior,
                      const RenderConfig& render, const ChainConfig& chain) {
  Sampler s(obs, prior, render, chain);
  Rng rng(chain.seed);
  return s.run(rng);
}

}  // namespace wreath
