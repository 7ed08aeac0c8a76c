#include "wreath/geometry.hpp"

#include <cmath>

#include "wreath/errors.hpp"

namespace wreath {

namespace {

// cos/sin at quarter-turn multiples come out as tiny nonzeros (cos(pi/2) ~
// 6.1e-17); snap so that discrete-group elements are exact and e.g. a 4-fold
// square renders pixel-identically to one built from axis-aligned translations.
double snap_unit(double v) {
  if (std::fabs(v) < 1e-15) return 0.0;
  if (std::fabs(v - 1.0) < 1e-15) return 1.0;
  if (std::fabs(v + 1.0) < 1e-15) return -1.0;
  return v;
}

Transform rotation_matrix(double theta) {
  const double c = snap_unit(std::cos(theta));
  const double s = snap_unit(std::sin(theta));
  Transform t;
  t.m = {c, s, 0, -s, c, 0, 0, 0, 1};
  return t;
}

}  // namespace

Transform translation(Axis axis, double t) {
  Transform r;
  r.m[axis == Axis::X ? 2 : 5] = t;
  return r;
}

Transform rotation(int n, long long k) {
  if (n < 2) throw InvalidGroupError("rotation order must be >= 2");
  return rotation_matrix(2.0 * M_PI * static_cast<double>(k) / n);
}

Transform rotation_continuous(double theta) { return rotation_matrix(theta); }

Transform mirror(long long k) {
  Transform t;
  if (k % 2 != 0) t.m[4] = -1.0;
  return t;
}

Transform scale(double l, long long k) {
  if (!(l > 0.0)) throw InvalidGroupError("scale factor must be > 0");
  const double f = std::pow(l, static_cast<double>(k));
  Transform t;
  t.m[0] = t.m[4] = f;
  return t;
}

Transform compose(const Transform& a, const Transform& b) {
  Transform r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r.m[static_cast<std::size_t>(3 * i + j)] = s;
    }
  return r;
}

Point apply(const Transform& t, Point p) {
  return {t(0, 0) * p.x + t(0, 1) * p.y + t(0, 2),
          t(1, 0) * p.x + t(1, 1) * p.y + t(1, 2)};
}

bool approx_equal(const Transform& a, const Transform& b, double tol) {
  for (std::size_t i = 0; i < 9; ++i)
    if (std::fabs(a.m[i] - b.m[i]) > tol) return false;
  return true;
}

}  // namespace wreath
