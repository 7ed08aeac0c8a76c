#include "wreath/wreath_process.hpp"

#include <cmath>

#include "wreath/errors.hpp"

namespace wreath {

bool level_carries_noise(const GroupSpec& g) {
  switch (g.kind) {
    case GroupKind::TransX:
    case GroupKind::TransY:
    case GroupKind::Rot:
    case GroupKind::RotFull:
      return true;
    case GroupKind::Mirror:
    case GroupKind::Scale:
      return false;
  }
  return false;
}

long long noise_entry_count(const Shape& s, int level_index) {
  long long n = 1;
  for (int m = level_index + 1; m < s.level_count(); ++m) {
    const Level& lv = s.levels[static_cast<std::size_t>(m)];
    n *= lv.occ.copy_count(lv.group);
  }
  return n;
}

int noise_entry_width(const Level& lv, int control_points) {
  if (lv.occ.continuous_on(lv.group)) return control_points;
  return lv.occ.copy_count(lv.group);
}

namespace {

bool is_rotation_kind(const GroupSpec& g) {
  return g.kind == GroupKind::Rot || g.kind == GroupKind::RotFull;
}

// Gamma parameters of the sigma prior for one level.
void hyper_params(const GroupSpec& g, const NoisePriorConfig& cfg,
                  double* shape, double* rate) {
  if (is_rotation_kind(g)) {
    const int n = g.kind == GroupKind::Rot ? g.order : cfg.rotfull_order;
    *shape = M_PI / n;
    *rate = static_cast<double>(n) * n;
  } else {
    *shape = 1.0;
    *rate = 20.0;
  }
  if (!cfg.gamma_by_rate) *rate = 1.0 / *rate;
}

double draw_perturbation(const GroupSpec& g, double sigma, Rng& rng) {
  if (is_rotation_kind(g)) return rng.von_mises(1.0 / (sigma * sigma));
  return rng.normal(0.0, sigma);
}

double log_perturbation(const GroupSpec& g, double sigma, double eps) {
  if (is_rotation_kind(g)) return log_von_mises_pdf(eps, 1.0 / (sigma * sigma));
  return log_normal_pdf(eps, sigma);
}

}  // namespace

std::optional<double> sample_hyper_level(const GroupSpec& g, Rng& rng,
                                         const NoisePriorConfig& cfg) {
  if (!level_carries_noise(g)) return std::nullopt;
  double shape, rate;
  hyper_params(g, cfg, &shape, &rate);
  return rng.gamma(shape, rate);
}

double log_prior_hyper_level(const GroupSpec& g, double sigma,
                             const NoisePriorConfig& cfg) {
  double shape, rate;
  hyper_params(g, cfg, &shape, &rate);
  return log_gamma_pdf(sigma, shape, rate);
}

NoiseHyper sample_hyper(const Shape& s, Rng& rng, const NoisePriorConfig& cfg) {
  NoiseHyper h;
  h.sigma.reserve(s.levels.size());
  for (const Level& lv : s.levels)
    h.sigma.push_back(sample_hyper_level(lv.group, rng, cfg));
  return h;
}

double log_prior_hyper(const Shape& s, const NoiseHyper& h,
                       const NoisePriorConfig& cfg) {
  if (h.sigma.size() != s.levels.size())
    throw ShapeMismatchError("hyper/shape level counts differ");
  double lp = 0.0;
  for (std::size_t i = 0; i < h.sigma.size(); ++i) {
    const bool carries = level_carries_noise(s.levels[i].group);
    if (carries != h.sigma[i].has_value())
      throw ShapeMismatchError("hyper entry does not match level kind");
    if (carries)
      lp += log_prior_hyper_level(s.levels[i].group, *h.sigma[i], cfg);
  }
  return lp;
}

NoiseTree sample_noise(const Shape& s, const NoiseHyper& h, Rng& rng,
                       int control_points) {
  if (h.sigma.size() != s.levels.size())
    throw ShapeMismatchError("hyper/shape level counts differ");
  NoiseTree t;
  t.levels.resize(s.levels.size());
  for (int i = 0; i < s.level_count(); ++i)
    resample_noise_level(s, h, t, i, rng, control_points);
  return t;
}

void resample_noise_level(const Shape& s, const NoiseHyper& h, NoiseTree& t,
                          int level_index, Rng& rng, int control_points) {
  const Level& lv = s.levels[static_cast<std::size_t>(level_index)];
  auto& entries = t.levels[static_cast<std::size_t>(level_index)];
  if (!level_carries_noise(lv.group)) {
    entries.clear();
    return;
  }
  const double sigma = h.sigma[static_cast<std::size_t>(level_index)].value();
  const long long n_entries = noise_entry_count(s, level_index);
  const int width = noise_entry_width(lv, control_points);
  entries.assign(static_cast<std::size_t>(n_entries), {});
  for (auto& e : entries) {
    e.resize(static_cast<std::size_t>(width));
    for (double& x : e) x = draw_perturbation(lv.group, sigma, rng);
  }
}

void check_noise_shape(const Shape& s, const NoiseTree& t, int control_points) {
  if (t.levels.size() != s.levels.size())
    throw ShapeMismatchError("noise/shape level counts differ");
  for (int i = 0; i < s.level_count(); ++i) {
    const Level& lv = s.levels[static_cast<std::size_t>(i)];
    const auto& entries = t.levels[static_cast<std::size_t>(i)];
    if (!level_carries_noise(lv.group)) {
      if (!entries.empty())
        throw ShapeMismatchError("noise on a rigid level");
      continue;
    }
    if (static_cast<long long>(entries.size()) != noise_entry_count(s, i))
      throw ShapeMismatchError("wrong noise entry count");
    const std::size_t width =
        static_cast<std::size_t>(noise_entry_width(lv, control_points));
    for (const auto& e : entries)
      if (e.size() != width) throw ShapeMismatchError("wrong noise entry width");
  }
}

double log_density_noise_level(const Shape& s, const NoiseHyper& h,
                               const NoiseTree& t, int level_index,
                               int control_points) {
  const Level& lv = s.levels[static_cast<std::size_t>(level_index)];
  if (!level_carries_noise(lv.group)) return 0.0;
  const double sigma = h.sigma[static_cast<std::size_t>(level_index)].value();
  (void)control_points;
  double lp = 0.0;
  for (const auto& e : t.levels[static_cast<std::size_t>(level_index)])
    for (const double x : e) lp += log_perturbation(lv.group, sigma, x);
  return lp;
}

double log_density_noise(const Shape& s, const NoiseHyper& h,
                         const NoiseTree& t, int control_points) {
  if (h.sigma.size() != s.levels.size())
    throw ShapeMismatchError("hyper/shape level counts differ");
  check_noise_shape(s, t, control_points);
  double lp = 0.0;
  for (int i = 0; i < s.level_count(); ++i)
    lp += log_density_noise_level(s, h, t, i, control_points);
  return lp;
}

// ---------------------------------------------------------------------------
// Special functions

double bessel_i0(double x) {
  x = std::fabs(x);
  if (x > 50.0) return std::exp(log_bessel_i0(x));
  // I0(x) = sum_m ((x/2)^m / m!)^2; converges fast for x <= 50.
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * m);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double log_bessel_i0(double x) {
  x = std::fabs(x);
  if (x <= 50.0) return std::log(bessel_i0(x));
  // I0(x) ~ e^x / sqrt(2 pi x) * (1 + 1/(8x) + 9/(128x^2) + ...).
  const double ix = 1.0 / x;
  double corr = 1.0, term = 1.0;
  for (int k = 1; k <= 6; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd * ix / (8.0 * k);
    corr += term;
  }
  return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(corr);
}

double log_von_mises_pdf(double eps, double kappa) {
  return kappa * std::cos(eps) - std::log(2.0 * M_PI) - log_bessel_i0(kappa);
}

double log_normal_pdf(double eps, double sigma) {
  const double z = eps / sigma;
  return -0.5 * std::log(2.0 * M_PI) - std::log(sigma) - 0.5 * z * z;
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return -INFINITY;
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

}  // namespace wreath
