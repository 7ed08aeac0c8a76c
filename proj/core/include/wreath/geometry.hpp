#pragma once

#include <array>

namespace wreath {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Axis { X, Y };

/// Affine map of the plane, stored as a row-major 3x3 homogeneous matrix.
/// The last row is always (0, 0, 1).
struct Transform {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Transform identity() { return Transform{}; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }
};

/// Translation by t along the given axis.
Transform translation(Axis axis, double t);

/// k-th element of the cyclic rotation group of order n (n >= 2): rotation by
/// theta = 2*pi*k/n. Row one of the linear part is (cos theta, sin theta), so
/// (1,0) maps to (cos theta, -sin theta) — positive k turns clockwise.
Transform rotation(int n, long long k);

/// Rotation by an arbitrary angle theta under the same convention; the
/// discrete group embeds exactly: rotation(n,k) == rotation_continuous(2*pi*k/n).
Transform rotation_continuous(double theta);

/// k-th element of the order-2 mirror group: identity for even k, reflection
/// across the X axis (y -> -y) for odd k.
Transform mirror(long long k);

/// k-th element of the scale group generated by factor l > 0: uniform scaling
/// by l^k.
Transform scale(double l, long long k);

/// Matrix product: apply(compose(a, b), p) == apply(a, apply(b, p)).
Transform compose(const Transform& a, const Transform& b);

Point apply(const Transform& t, Point p);

bool approx_equal(const Transform& a, const Transform& b, double tol);

}  // namespace wreath
