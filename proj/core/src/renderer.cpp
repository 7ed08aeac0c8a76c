#include "wreath/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "wreath/errors.hpp"

namespace wreath {

namespace {

constexpr long long kPointBudget = 1'000'000;

struct Unfolder {
  const Shape& s;
  const NoiseTree* noise;
  const RenderConfig& cfg;
  StrokeSet out;
  long long points = 0;

  void spend(long long n) {
    points += n;
    if (points > kPointBudget)
      throw UnfoldError("unfold exceeds the point budget");
  }

  double eps_at(int level, long long entry, int elem) const {
    if (!noise) return 0.0;
    return noise->levels[static_cast<std::size_t>(level)]
                        [static_cast<std::size_t>(entry)]
                        [static_cast<std::size_t>(elem)];
  }

  // Element `value` is the occupied index/offset/angle; eps its perturbation.
  static Transform element_transform(const Level& lv, double value, double eps) {
    switch (lv.group.kind) {
      case GroupKind::TransX: return translation(Axis::X, value + eps);
      case GroupKind::TransY: return translation(Axis::Y, value + eps);
      case GroupKind::Rot:
        return rotation_continuous(2.0 * M_PI * value / lv.group.order + eps);
      case GroupKind::RotFull: return rotation_continuous(value + eps);
      case GroupKind::Mirror: return mirror(static_cast<long long>(value));
      case GroupKind::Scale:
        return scale(lv.group.factor, static_cast<long long>(value));
    }
    return Transform::identity();
  }

  static double element_value(const Level& lv, int e) {
    if (lv.occ.kind == OccKind::Discrete)
      return lv.occ.values[static_cast<std::size_t>(e)];
    return static_cast<double>(e);  // Full on a finite group: 0..count-1
  }

  static double similarity_scale(const Transform& t) {
    return std::hypot(t(0, 0), t(1, 0));
  }

  // Collapse the all-single fiber below `level` into one noisy point.
  Point fiber_point(int level, long long entry) const {
    Transform f = Transform::identity();
    for (int m = level - 1; m >= 0; --m) {
      const Level& lv = s.levels[static_cast<std::size_t>(m)];
      const double eps =
          level_carries_noise(lv.group) ? eps_at(m, entry, 0) : 0.0;
      f = compose(f, element_transform(lv, element_value(lv, 0), eps));
    }
    return apply(f, Point{0.0, 0.0});
  }

  void emit_interval(int level, const Transform& t, long long entry) {
    const Level& lv = s.levels[static_cast<std::size_t>(level)];
    const Point p = fiber_point(level, entry);
    const double a = lv.occ.kind == OccKind::Full ? -0.5 : lv.occ.lo;
    const double b = lv.occ.kind == OccKind::Full ? 0.5 : lv.occ.hi;
    const bool along_x = lv.group.kind == GroupKind::TransX;
    const auto at = [&](double off) {
      return apply(t, along_x ? Point{p.x + off, p.y} : Point{p.x, p.y + off});
    };
    Stroke st;
    st.kind = Stroke::Kind::Polyline;
    if (!noise) {
      st.points = {at(a), at(b)};
    } else {
      const int k_pts = std::max(2, cfg.control_points);
      const double root_k = std::sqrt(static_cast<double>(k_pts));
      st.points.reserve(static_cast<std::size_t>(k_pts));
      for (int k = 0; k < k_pts; ++k) {
        const double off = a + (b - a) * k / (k_pts - 1);
        st.points.push_back(at(off + eps_at(level, entry, k) / root_k));
      }
    }
    spend(static_cast<long long>(st.points.size()));
    out.push_back(std::move(st));
  }

  void emit_circle(int level, const Transform& t, long long entry) {
    const Point p = fiber_point(level, entry);
    const double r = std::hypot(p.x, p.y);
    if (r < 1e-9) {
      Stroke st;
      st.kind = Stroke::Kind::Dot;
      st.points = {apply(t, p)};
      spend(1);
      out.push_back(std::move(st));
      return;
    }
    if (!noise) {
      Stroke st;
      st.kind = Stroke::Kind::Circle;
      st.center = apply(t, Point{0.0, 0.0});
      st.radius = r * similarity_scale(t);
      spend(16);
      out.push_back(std::move(st));
      return;
    }
    // Sample the jittered circle every ~4 rendered pixels of arc.
    const double r_px = r * similarity_scale(t) * cfg.scale;
    const int n_pts =
        std::max(16, static_cast<int>(std::ceil(2.0 * M_PI * r_px / 4.0)));
    const int k_pts = std::max(2, cfg.control_points);
    const double root_k = std::sqrt(static_cast<double>(k_pts));
    Stroke st;
    st.kind = Stroke::Kind::Polyline;
    st.closed = true;
    st.points.reserve(static_cast<std::size_t>(n_pts));
    for (int j = 0; j < n_pts; ++j) {
      const double phi = -M_PI + 2.0 * M_PI * j / n_pts;
      // Periodic linear interpolation between the K radial knots.
      const double pos = (phi + M_PI) / (2.0 * M_PI) * k_pts;
      const int k0 = static_cast<int>(std::floor(pos)) % k_pts;
      const int k1 = (k0 + 1) % k_pts;
      const double w = pos - std::floor(pos);
      const double eps = (1.0 - w) * eps_at(level, entry, k0) +
                         w * eps_at(level, entry, k1);
      const double rho = std::max(0.0, r + eps / root_k);
      st.points.push_back(apply(t, Point{rho * std::cos(phi), rho * std::sin(phi)}));
    }
    spend(n_pts);
    out.push_back(std::move(st));
  }

  void build(int level, const Transform& t, long long entry) {
    if (level < 0) {
      Stroke st;
      st.kind = Stroke::Kind::Dot;
      st.points = {apply(t, Point{0.0, 0.0})};
      spend(1);
      out.push_back(std::move(st));
      return;
    }
    const Level& lv = s.levels[static_cast<std::size_t>(level)];
    if (lv.occ.continuous_on(lv.group)) {
      if (!prefix_is_point(s, level))
        throw UnfoldError("continuous occupancy above a non-point fiber");
      if (lv.group.kind == GroupKind::RotFull)
        emit_circle(level, t, entry);
      else
        emit_interval(level, t, entry);
      return;
    }
    const int count = lv.occ.copy_count(lv.group);
    const bool noisy = level_carries_noise(lv.group);
    for (int e = 0; e < count; ++e) {
      const double eps = noisy ? eps_at(level, entry, e) : 0.0;
      const Transform a = element_transform(lv, element_value(lv, e), eps);
      build(level - 1, compose(t, a), entry * count + e);
    }
  }
};

}  // namespace

StrokeSet unfold(const Shape& s, const NoiseTree* noise,
                 const RenderConfig& cfg) {
  if (noise) check_noise_shape(s, *noise, cfg.control_points);
  Unfolder u{s, noise, cfg};
  u.build(s.level_count() - 1, Transform::identity(), 0);
  return std::move(u.out);
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

double dist2_point_segment(double qx, double qy, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = qx - a.x, wy = qy - a.y;
  const double vv = vx * vx + vy * vy;
  double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * vx, dy = wy - t * vy;
  return dx * dx + dy * dy;
}

struct SubGrid {
  int w, h, ss;
  std::vector<std::uint8_t> bits;
  SubGrid(int width, int height, int supersample)
      : w(width * supersample), h(height * supersample), ss(supersample),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

  // Mark every subsample within `half` (pixel units) of the predicate's
  // geometry, restricted to the pixel-space bbox [x0,x1]x[y0,y1].
  template <class Dist2>
  void mark(double x0, double x1, double y0, double y1, double half,
            Dist2&& dist2) {
    const double r = half + 1.0;
    const int u0 = std::max(0, static_cast<int>(std::floor((x0 - r) * ss)));
    const int u1 = std::min(w - 1, static_cast<int>(std::ceil((x1 + r) * ss)));
    const int v0 = std::max(0, static_cast<int>(std::floor((y0 - r) * ss)));
    const int v1 = std::min(h - 1, static_cast<int>(std::ceil((y1 + r) * ss)));
    const double h2 = half * half;
    for (int v = v0; v <= v1; ++v) {
      const double qy = (v + 0.5) / ss;
      std::uint8_t* row = bits.data() + static_cast<std::size_t>(v) * w;
      for (int u = u0; u <= u1; ++u) {
        if (row[u]) continue;
        const double qx = (u + 0.5) / ss;
        if (dist2(qx, qy) <= h2) row[u] = 1;
      }
    }
  }
};

}  // namespace

Raster rasterize(const StrokeSet& strokes, const RenderConfig& cfg) {
  const int ss = std::max(1, cfg.supersample);
  SubGrid grid(cfg.width, cfg.height, ss);
  const double half = cfg.stroke_width / 2.0;
  const auto to_px = [&](Point p) {
    return Point{cfg.width / 2.0 + cfg.scale * p.x,
                 cfg.height / 2.0 - cfg.scale * p.y};
  };

  for (const Stroke& st : strokes) {
    switch (st.kind) {
      case Stroke::Kind::Dot: {
        const Point c = to_px(st.points.at(0));
        grid.mark(c.x, c.x, c.y, c.y, half, [&](double qx, double qy) {
          const double dx = qx - c.x, dy = qy - c.y;
          return dx * dx + dy * dy;
        });
        break;
      }
      case Stroke::Kind::Polyline: {
        const std::size_t n = st.points.size();
        for (std::size_t i = 0; i + 1 < n + (st.closed ? 1 : 0); ++i) {
          const Point a = to_px(st.points[i]);
          const Point b = to_px(st.points[(i + 1) % n]);
          grid.mark(std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y),
                    std::max(a.y, b.y), half, [&](double qx, double qy) {
                      return dist2_point_segment(qx, qy, a, b);
                    });
        }
        break;
      }
      case Stroke::Kind::Circle: {
        const Point c = to_px(st.center);
        const double rho = st.radius * cfg.scale;
        grid.mark(c.x - rho, c.x + rho, c.y - rho, c.y + rho, half,
                  [&](double qx, double qy) {
                    const double d = std::hypot(qx - c.x, qy - c.y) - rho;
                    return d * d;
                  });
        break;
      }
    }
  }

  Raster out(cfg.width, cfg.height);
  const double inv = 1.0 / (static_cast<double>(ss) * ss);
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x) {
      int acc = 0;
      for (int v = 0; v < ss; ++v) {
        const std::uint8_t* row =
            grid.bits.data() + static_cast<std::size_t>(y * ss + v) * grid.w;
        for (int u = 0; u < ss; ++u) acc += row[x * ss + u];
      }
      out.at(x, y) = acc * inv;
    }
  return out;
}

Raster gaussian_blur(const Raster& img, int half_width, double sigma) {
  if (half_width <= 0) return img;
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma <= 0");
  const int w = half_width;
  std::vector<double> taps(static_cast<std::size_t>(2 * w + 1));
  double sum = 0.0;
  for (int i = -w; i <= w; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + w)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;

  const auto cx = [&](int x) { return std::clamp(x, 0, img.width - 1); };
  const auto cy = [&](int y) { return std::clamp(y, 0, img.height - 1); };
  Raster mid(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -w; i <= w; ++i)
        acc += taps[static_cast<std::size_t>(i + w)] * img.at(cx(x + i), y);
      mid.at(x, y) = acc;
    }
  Raster out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -w; i <= w; ++i)
        acc += taps[static_cast<std::size_t>(i + w)] * mid.at(x, cy(y + i));
      out.at(x, y) = std::clamp(acc, 0.0, 1.0);
    }
  return out;
}

Raster render(const Shape& s, const NoiseTree* noise, const BlurParams& blur,
              const RenderConfig& cfg) {
  return gaussian_blur(rasterize(unfold(s, noise, cfg), cfg), blur);
}

}  // namespace wreath
