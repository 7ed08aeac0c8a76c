#include "wreath/priors.hpp"

#include <algorithm>
#include <cmath>

#include "wreath/errors.hpp"

namespace wreath {

namespace {

bool family_can_be_continuous(const GroupSpec& g) {
  return g.kind == GroupKind::TransX || g.kind == GroupKind::TransY ||
         g.kind == GroupKind::RotFull;
}

int rot_menu_size(const PriorConfig& cfg) {
  return static_cast<int>(cfg.rot_orders.size()) + (cfg.rot_continuous ? 1 : 0);
}

GroupSpec sample_group(Rng& rng, const PriorConfig& cfg) {
  switch (rng.uniform_int(4)) {
    case 0: return GroupSpec::trans(Axis::X);
    case 1: return GroupSpec::trans(Axis::Y);
    case 2: {
      const int m = rot_menu_size(cfg);
      const int pick = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m)));
      if (pick < static_cast<int>(cfg.rot_orders.size()))
        return GroupSpec::rot(cfg.rot_orders[static_cast<std::size_t>(pick)]);
      return GroupSpec::rot_full();
    }
    default: return GroupSpec::mirror_group();
  }
}

double log_group_prob(const GroupSpec& g, const PriorConfig& cfg) {
  const double log_quarter = -std::log(4.0);
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY:
    case GroupKind::Mirror:
      return log_quarter;
    case GroupKind::Rot: {
      const auto& v = cfg.rot_orders;
      if (std::find(v.begin(), v.end(), g.order) == v.end()) return -INFINITY;
      return log_quarter - std::log(static_cast<double>(rot_menu_size(cfg)));
    }
    case GroupKind::RotFull:
      if (!cfg.rot_continuous) return -INFINITY;
      return log_quarter - std::log(static_cast<double>(rot_menu_size(cfg)));
    case GroupKind::Scale:
      return -INFINITY;
  }
  return -INFINITY;
}

double rot_full_menu_prob(const PriorConfig& cfg) {
  if (!cfg.rot_continuous) return 0.0;
  return 0.25 / rot_menu_size(cfg);
}

// --- single-element laws ---------------------------------------------------

double sample_single_value(const GroupSpec& g, Rng& rng, const PriorConfig& cfg) {
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY: {
      const long long b = rng.uniform_int(1ll, static_cast<long long>(cfg.b_max));
      return static_cast<double>(rng.uniform_int(-b, b));
    }
    case GroupKind::Rot:
      return static_cast<double>(rng.uniform_int(static_cast<std::uint64_t>(g.order)));
    case GroupKind::RotFull:
      return rng.uniform(-M_PI, M_PI);
    default:  // Mirror
      return static_cast<double>(rng.uniform_int(2));
  }
}

double log_single_value(const GroupSpec& g, double v, const PriorConfig& cfg) {
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY: {
      if (v != std::floor(v)) return -INFINITY;
      const long long a = std::llabs(static_cast<long long>(v));
      if (a > cfg.b_max) return -INFINITY;
      double p = 0.0;
      for (long long b = std::max(1ll, a); b <= cfg.b_max; ++b)
        p += 1.0 / (2.0 * static_cast<double>(b) + 1.0);
      return std::log(p / cfg.b_max);
    }
    case GroupKind::Rot:
      if (v != std::floor(v) || v < 0 || v >= g.order) return -INFINITY;
      return -std::log(static_cast<double>(g.order));
    case GroupKind::RotFull:
      if (v < -M_PI || v >= M_PI) return -INFINITY;
      return -std::log(2.0 * M_PI);
    default:  // Mirror
      if (v != 0.0 && v != 1.0) return -INFINITY;
      return -std::log(2.0);
  }
}

// --- subset ("special") laws ----------------------------------------------

Occupancy sample_subset(const GroupSpec& g, Rng& rng, const PriorConfig& cfg) {
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY: {
      for (;;) {
        const long long b = rng.uniform_int(1ll, static_cast<long long>(cfg.b_max));
        const double q = 1.0 / (2.0 * static_cast<double>(b) + 1.0);
        std::vector<double> v;
        for (long long j = -b; j <= b; ++j)
          if (rng.bernoulli(q)) v.push_back(static_cast<double>(j));
        if (!v.empty()) return Occupancy::discrete(std::move(v));
      }
    }
    case GroupKind::Rot:
    case GroupKind::Mirror: {
      const int n = g.kind == GroupKind::Rot ? g.order : 2;
      const double q = 1.0 / n;
      for (;;) {
        std::vector<double> v;
        for (int k = 0; k < n; ++k)
          if (rng.bernoulli(q)) v.push_back(static_cast<double>(k));
        if (!v.empty()) return Occupancy::discrete(std::move(v));
      }
    }
    default: {  // RotFull: a few iid angles
      const long long m =
          rng.uniform_int(1ll, static_cast<long long>(cfg.rotfull_special_max));
      std::vector<double> v;
      v.reserve(static_cast<std::size_t>(m));
      for (long long k = 0; k < m; ++k) v.push_back(rng.uniform(-M_PI, M_PI));
      return Occupancy::discrete(std::move(v));
    }
  }
}

double log_subset(const GroupSpec& g, const std::vector<double>& set,
                  const PriorConfig& cfg) {
  const auto sz = static_cast<double>(set.size());
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY: {
      long long maxabs = 0;
      for (const double v : set) {
        if (v != std::floor(v)) return -INFINITY;
        maxabs = std::max(maxabs, std::llabs(static_cast<long long>(v)));
      }
      if (maxabs > cfg.b_max) return -INFINITY;
      double num = 0.0, denom = 0.0;
      for (long long b = 1; b <= cfg.b_max; ++b) {
        const double n_slots = 2.0 * static_cast<double>(b) + 1.0;
        const double q = 1.0 / n_slots;
        denom += 1.0 - std::pow(1.0 - q, n_slots);
        if (b >= maxabs)
          num += std::pow(q, sz) * std::pow(1.0 - q, n_slots - sz);
      }
      return std::log(num / denom);
    }
    case GroupKind::Rot:
    case GroupKind::Mirror: {
      const int n = g.kind == GroupKind::Rot ? g.order : 2;
      for (const double v : set)
        if (v != std::floor(v) || v < 0 || v >= n) return -INFINITY;
      const double q = 1.0 / n;
      return sz * std::log(q) + (n - sz) * std::log1p(-q) -
             std::log1p(-std::pow(1.0 - q, n));
    }
    default: {  // RotFull
      const int m = static_cast<int>(set.size());
      if (m < 1 || m > cfg.rotfull_special_max) return -INFINITY;
      for (const double v : set)
        if (v < -M_PI || v >= M_PI) return -INFINITY;
      return -std::log(static_cast<double>(cfg.rotfull_special_max)) +
             std::lgamma(sz + 1.0) - sz * std::log(2.0 * M_PI);
    }
  }
}

Occupancy materialize_full(const GroupSpec& g) {
  if (g.kind == GroupKind::TransX || g.kind == GroupKind::TransY)
    return Occupancy::interval(-0.5, 0.5);
  return Occupancy::full();
}

// Per-level validity renormalizer: probability that a fresh draw is NOT a
// continuous occupancy (which would be rejected over an extended fiber).
double log_level_normalizer(const PriorConfig& cfg, bool prefix_point) {
  if (prefix_point) return 0.0;
  const double p_continuous =
      cfg.p_full * (0.25 + 0.25 + rot_full_menu_prob(cfg));
  return std::log1p(-p_continuous);
}

}  // namespace

Occupancy sample_occupancy_prior(const GroupSpec& g, Rng& rng,
                                 const PriorConfig& cfg) {
  const double u = rng.uniform();
  if (u < cfg.p_single)
    return Occupancy::single(sample_single_value(g, rng, cfg));
  if (u < cfg.p_single + cfg.p_full) return materialize_full(g);
  return sample_subset(g, rng, cfg);
}

double log_occupancy_prior(const GroupSpec& g, const Occupancy& occ,
                           const PriorConfig& cfg) {
  const double p_subset_mode = 1.0 - cfg.p_single - cfg.p_full;
  switch (occ.kind) {
    case OccKind::Full:
      // The prior spells a fully-occupied translation as the unit interval,
      // so the Full spelling on Trans is unreachable; Scale is out entirely.
      if (g.kind == GroupKind::TransX || g.kind == GroupKind::TransY ||
          g.kind == GroupKind::Scale)
        return -INFINITY;
      return std::log(cfg.p_full);
    case OccKind::Interval:
      if (g.kind != GroupKind::TransX && g.kind != GroupKind::TransY)
        return -INFINITY;
      if (occ.lo != -0.5 || occ.hi != 0.5) return -INFINITY;
      return std::log(cfg.p_full);
    case OccKind::Discrete: {
      if (occ.values.empty()) return -INFINITY;
      const double lsub = log_subset(g, occ.values, cfg);
      if (occ.values.size() == 1) {
        const double lsingle = log_single_value(g, occ.values[0], cfg);
        // Both the single-element mode and a size-1 subset land here.
        double p = 0.0;
        if (lsingle != -INFINITY) p += cfg.p_single * std::exp(lsingle);
        if (lsub != -INFINITY) p += p_subset_mode * std::exp(lsub);
        return p > 0.0 ? std::log(p) : -INFINITY;
      }
      if (lsub == -INFINITY) return -INFINITY;
      return std::log(p_subset_mode) + lsub;
    }
  }
  return -INFINITY;
}

Level sample_level_prior(Rng& rng, const PriorConfig& cfg, bool prefix_point,
                         bool force_point) {
  if (force_point) {
    Level lv;
    lv.group = sample_group(rng, cfg);
    lv.occ = Occupancy::single(sample_single_value(lv.group, rng, cfg));
    return lv;
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Level lv;
    lv.group = sample_group(rng, cfg);
    lv.occ = sample_occupancy_prior(lv.group, rng, cfg);
    if (!prefix_point && lv.occ.continuous_on(lv.group)) continue;
    return lv;
  }
  throw PriorSamplingError("level prior failed to produce a valid draw");
}

double log_level_prior(const Level& lv, const PriorConfig& cfg,
                       bool prefix_point, bool force_point) {
  const double lg = log_group_prob(lv.group, cfg);
  if (lg == -INFINITY) return -INFINITY;

  if (force_point) {
    if (lv.occ.kind != OccKind::Discrete || lv.occ.values.size() != 1)
      return -INFINITY;
    return lg + log_single_value(lv.group, lv.occ.values[0], cfg);
  }

  if (lv.occ.continuous_on(lv.group) && !prefix_point) return -INFINITY;
  const double locc = log_occupancy_prior(lv.group, lv.occ, cfg);
  if (locc == -INFINITY) return -INFINITY;
  return lg + locc - log_level_normalizer(cfg, prefix_point);
}

Shape sample_shape_prior(Rng& rng, const PriorConfig& cfg) {
  const long long n = rng.uniform_int(1ll, static_cast<long long>(cfg.max_levels));
  Shape s;
  s.levels.reserve(static_cast<std::size_t>(n));
  bool point = true;
  for (long long i = 0; i < n; ++i) {
    Level lv = sample_level_prior(rng, cfg, point, false);
    point = point && lv.occ.kind == OccKind::Discrete && lv.occ.values.size() == 1;
    s.levels.push_back(std::move(lv));
  }
  return s;
}

double log_prior_shape(const Shape& s, const PriorConfig& cfg) {
  try {
    validate_shape(s, cfg.max_levels);
  } catch (const ValidationError&) {
    return -INFINITY;
  }
  double lp = -std::log(static_cast<double>(cfg.max_levels));
  bool point = true;
  for (const Level& lv : s.levels) {
    lp += log_level_prior(lv, cfg, point, false);
    if (lp == -INFINITY) return -INFINITY;
    point = point && lv.occ.kind == OccKind::Discrete && lv.occ.values.size() == 1;
  }
  return lp;
}

BlurParams sample_blur(Rng& rng, const PriorConfig& cfg) {
  BlurParams b;
  b.half_width = static_cast<int>(std::llround(cfg.b_w * rng.beta(1.0, 2.0)));
  b.sigma = cfg.b_sigma * rng.exponential();
  return b;
}

namespace {
// CDF of Beta(1,2), clamped to [0,1].
double beta12_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - (1.0 - x) * (1.0 - x);
}
}  // namespace

double log_prior_blur(const BlurParams& b, const PriorConfig& cfg) {
  if (b.half_width < 0 || !(b.sigma > 0.0)) return -INFINITY;
  const double mass = beta12_cdf((b.half_width + 0.5) / cfg.b_w) -
                      beta12_cdf((b.half_width - 0.5) / cfg.b_w);
  if (mass <= 0.0) return -INFINITY;
  return std::log(mass) - std::log(cfg.b_sigma) - b.sigma / cfg.b_sigma;
}

double sample_lambda(Rng& rng, const PriorConfig& cfg) {
  return rng.uniform(cfg.lambda_min, cfg.lambda_max);
}

double log_prior_lambda(double lambda, const PriorConfig& cfg) {
  if (lambda < cfg.lambda_min || lambda > cfg.lambda_max) return -INFINITY;
  return -std::log(cfg.lambda_max - cfg.lambda_min);
}

}  // namespace wreath
