#include "wreath/random.hpp"

#include <cmath>
#include <stdexcept>

namespace wreath {

double Rng::uniform() {
  // Top 53 bits -> [0, 1).
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::uniform_pos() { return 1.0 - uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n == 0");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return x % n;
}

long long Rng::uniform_int(long long lo, long long hi) {
  return lo + static_cast<long long>(
                  uniform_int(static_cast<std::uint64_t>(hi - lo) + 1));
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape, double rate) {
  if (shape <= 0 || rate <= 0)
    throw std::invalid_argument("gamma: non-positive parameter");
  if (shape < 1.0) {
    // Boost a shape+1 draw down: X_a = X_{a+1} * U^{1/a}.
    const double x = gamma(shape + 1.0, 1.0);
    const double u = uniform_pos();
    return x * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::von_mises(double kappa) {
  if (kappa < 0) throw std::invalid_argument("von_mises: negative kappa");
  if (kappa < 1e-8) return uniform(-M_PI, M_PI);
  if (kappa > 700.0) {
    // Concentrated enough that the wrapped normal is exact to double precision.
    double t = normal(0.0, 1.0 / std::sqrt(kappa));
    t = std::remainder(t, 2.0 * M_PI);
    return t <= -M_PI ? t + 2.0 * M_PI : t;
  }
  // Best & Fisher (1979) wrapped-Cauchy envelope rejection.
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = uniform();
    const double z = std::cos(M_PI * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double u3 = uniform();
      return u3 < 0.5 ? -std::acos(f) : std::acos(f);
    }
  }
}

}  // namespace wreath
