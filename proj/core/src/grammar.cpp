#include "wreath/grammar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "wreath/errors.hpp"

namespace wreath {

namespace {

bool is_integral_value(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 9.0e15;
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // collapse -0
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

// Shortest form that still reads back as real-formatted (decimal point or
// exponent present) — used for interval bounds.
std::string format_real(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string format_index(double v) {
  if (is_integral_value(v)) return std::to_string(static_cast<long long>(v));
  return format_double(v);
}

}  // namespace

Occupancy Occupancy::discrete(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  Occupancy o;
  o.kind = OccKind::Discrete;
  o.values = std::move(v);
  return o;
}

Occupancy Occupancy::interval(double lo, double hi) {
  Occupancy o;
  o.kind = OccKind::Interval;
  o.lo = lo;
  o.hi = hi;
  return o;
}

bool Occupancy::continuous_on(const GroupSpec& g) const {
  if (kind == OccKind::Interval) return true;
  if (kind != OccKind::Full) return false;
  return g.kind == GroupKind::TransX || g.kind == GroupKind::TransY ||
         g.kind == GroupKind::RotFull;
}

int Occupancy::copy_count(const GroupSpec& g) const {
  if (continuous_on(g)) return 1;
  if (kind == OccKind::Discrete) return static_cast<int>(values.size());
  // Full on a finite-index group.
  switch (g.kind) {
    case GroupKind::Rot: return g.order;
    case GroupKind::Mirror: return 2;
    default: return 0;  // Full on Scale is invalid; caught by validate_shape
  }
}

bool operator==(const GroupSpec& a, const GroupSpec& b) {
  return a.kind == b.kind && a.order == b.order && a.factor == b.factor;
}
bool operator==(const Occupancy& a, const Occupancy& b) {
  return a.kind == b.kind && a.values == b.values && a.lo == b.lo && a.hi == b.hi;
}
bool operator==(const Level& a, const Level& b) {
  return a.group == b.group && a.occ == b.occ;
}
bool operator==(const Shape& a, const Shape& b) { return a.levels == b.levels; }

// ---------------------------------------------------------------------------
// Serialization

namespace {

bool is_contiguous_int_run(const std::vector<double>& v) {
  if (v.size() < 3) return false;
  for (const double x : v)
    if (!is_integral_value(x)) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] != v[i - 1] + 1.0) return false;
  return true;
}

void serialize_occ(std::string& out, const Level& lv) {
  const Occupancy& o = lv.occ;
  switch (o.kind) {
    case OccKind::Full:
      out += "full";
      return;
    case OccKind::Interval:
      out += '[';
      out += format_real(o.lo);
      out += ',';
      out += format_real(o.hi);
      out += ']';
      return;
    case OccKind::Discrete:
      out += '[';
      if (is_contiguous_int_run(o.values)) {
        out += format_index(o.values.front());
        out += "..";
        out += format_index(o.values.back());
      } else {
        for (std::size_t i = 0; i < o.values.size(); ++i) {
          if (i) out += ',';
          out += format_index(o.values[i]);
        }
      }
      out += ']';
      return;
  }
}

void serialize_group(std::string& out, const GroupSpec& g) {
  switch (g.kind) {
    case GroupKind::TransX: out += "Trans X"; return;
    case GroupKind::TransY: out += "Trans Y"; return;
    case GroupKind::Rot: out += "Rot " + std::to_string(g.order); return;
    case GroupKind::RotFull: out += "Rot 2\xcf\x80"; return;  // "Rot 2π"
    case GroupKind::Mirror: out += "Mirror"; return;
    case GroupKind::Scale: out += "Scale " + format_double(g.factor); return;
  }
}

}  // namespace

std::string serialize_shape(const Shape& s) {
  std::string out = "[";
  for (int i = 0; i < s.level_count(); ++i) {
    if (i) out += "; ";
    out += '(';
    serialize_group(out, s.levels[static_cast<std::size_t>(i)].group);
    out += ',';
    serialize_occ(out, s.levels[static_cast<std::size_t>(i)]);
    out += ')';
  }
  out += ']';
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Cursor {
  const std::string& s;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  bool done() const { return pos >= s.size(); }
  char peek() const { return done() ? '\0' : s[pos]; }

  void advance() {
    if (done()) return;
    if (s[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_ws() {
    for (;;) {
      while (!done() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r' ||
                         s[pos] == '\n'))
        advance();
      if (!done() && s[pos] == '#') {
        while (!done() && s[pos] != '\n') advance();
        continue;
      }
      return;
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line, col);
  }

  void expect(char c, const char* what) {
    skip_ws();
    if (peek() != c) fail(std::string("expected ") + what);
    advance();
  }

  bool try_eat(char c) {
    skip_ws();
    if (peek() != c) return false;
    advance();
    return true;
  }

  bool try_eat_word(const char* w) {
    skip_ws();
    std::size_t n = 0;
    while (w[n] != '\0') ++n;
    if (s.compare(pos, n, w) != 0) return false;
    // Reject if the keyword continues into a longer identifier.
    const char after = pos + n < s.size() ? s[pos + n] : '\0';
    if (std::isalnum(static_cast<unsigned char>(after)) || after == '_')
      return false;
    for (std::size_t i = 0; i < n; ++i) advance();
    return true;
  }
};

struct Number {
  double value = 0.0;
  bool real_formatted = false;  // lexeme carried '.' or an exponent
};

Number parse_number(Cursor& c) {
  c.skip_ws();
  const std::size_t start = c.pos;
  const int line = c.line, col = c.col;
  if (c.peek() == '-' || c.peek() == '+') c.advance();
  bool digits = false, realfmt = false;
  while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
    digits = true;
    c.advance();
  }
  // A '.' only belongs to the number if not the start of a ".." range token.
  if (c.peek() == '.' && !(c.pos + 1 < c.s.size() && c.s[c.pos + 1] == '.')) {
    realfmt = true;
    c.advance();
    while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
      digits = true;
      c.advance();
    }
  }
  if (c.peek() == 'e' || c.peek() == 'E') {
    realfmt = true;
    c.advance();
    if (c.peek() == '-' || c.peek() == '+') c.advance();
    if (!std::isdigit(static_cast<unsigned char>(c.peek())))
      throw ParseError("malformed exponent", c.line, c.col);
    while (std::isdigit(static_cast<unsigned char>(c.peek()))) c.advance();
  }
  if (!digits) throw ParseError("expected a number", line, col);
  double v = 0.0;
  const char* b = c.s.data() + start;
  const char* e = c.s.data() + c.pos;
  if (*b == '+') ++b;  // from_chars rejects a leading plus
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    throw ParseError("malformed number", line, col);
  return {v, realfmt};
}

long long require_integer(Cursor& c, const Number& n, const char* what) {
  if (n.real_formatted || !is_integral_value(n.value))
    c.fail(std::string(what) + " must be an integer");
  return static_cast<long long>(n.value);
}

GroupSpec parse_group(Cursor& c) {
  if (c.try_eat_word("Trans")) {
    c.skip_ws();
    if (c.peek() == 'X') {
      c.advance();
      return GroupSpec::trans(Axis::X);
    }
    if (c.peek() == 'Y') {
      c.advance();
      return GroupSpec::trans(Axis::Y);
    }
    c.fail("expected axis X or Y after Trans");
  }
  if (c.try_eat_word("Rot")) {
    c.skip_ws();
    // "2π" (UTF-8 cf80) or the ASCII alias "2pi" selects the continuous group.
    if (c.s.compare(c.pos, 3, "2\xcf\x80") == 0) {
      c.advance();
      c.advance();
      c.advance();
      return GroupSpec::rot_full();
    }
    if (c.s.compare(c.pos, 3, "2pi") == 0) {
      const char after = c.pos + 3 < c.s.size() ? c.s[c.pos + 3] : '\0';
      if (!std::isalnum(static_cast<unsigned char>(after)) && after != '_') {
        c.advance();
        c.advance();
        c.advance();
        return GroupSpec::rot_full();
      }
    }
    const Number n = parse_number(c);
    const long long order = require_integer(c, n, "rotation order");
    if (order < 2 || order > 1'000'000) c.fail("rotation order out of range");
    return GroupSpec::rot(static_cast<int>(order));
  }
  if (c.try_eat_word("Mirror")) return GroupSpec::mirror_group();
  if (c.try_eat_word("Scale")) {
    const Number n = parse_number(c);
    return GroupSpec::scale_group(n.value);
  }
  c.fail("expected a group (Trans/Rot/Mirror/Scale)");
}

Occupancy parse_occ(Cursor& c, const GroupSpec& g) {
  if (c.try_eat_word("full")) return Occupancy::full();
  c.expect('[', "'[' or 'full'");
  c.skip_ws();
  if (c.try_eat(']')) {
    Occupancy o;  // empty discrete set; rejected by validate_shape
    return o;
  }
  const Number first = parse_number(c);
  c.skip_ws();
  if (c.peek() == '.' && c.pos + 1 < c.s.size() && c.s[c.pos + 1] == '.') {
    c.advance();
    c.advance();
    const long long a = require_integer(c, first, "range bound");
    const Number second = parse_number(c);
    const long long b = require_integer(c, second, "range bound");
    if (b < a) c.fail("descending range");
    c.expect(']', "']'");
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(b - a + 1));
    for (long long k = a; k <= b; ++k) v.push_back(static_cast<double>(k));
    return Occupancy::discrete(std::move(v));
  }
  std::vector<Number> items{first};
  while (c.try_eat(',')) items.push_back(parse_number(c));
  c.expect(']', "']'");

  const bool is_trans =
      g.kind == GroupKind::TransX || g.kind == GroupKind::TransY;
  if (is_trans && items.size() == 2 && items[0].real_formatted &&
      items[1].real_formatted) {
    // Two decimal-formatted offsets on a translation level: an interval.
    if (items[0].value == items[1].value)
      return Occupancy::single(items[0].value);  // degenerate [c,c]
    return Occupancy::interval(items[0].value, items[1].value);
  }
  std::vector<double> v;
  v.reserve(items.size());
  for (const Number& n : items) v.push_back(n.value);
  return Occupancy::discrete(std::move(v));
}

}  // namespace

Shape parse_shape(const std::string& text, int max_levels) {
  Cursor c{text};
  c.expect('[', "'['");
  Shape s;
  c.skip_ws();
  if (!c.try_eat(']')) {
    for (;;) {
      c.expect('(', "'('");
      Level lv;
      lv.group = parse_group(c);
      c.expect(',', "','");
      lv.occ = parse_occ(c, lv.group);
      c.expect(')', "')'");
      s.levels.push_back(std::move(lv));
      if (!c.try_eat(';')) break;
    }
    c.expect(']', "']'");
  }
  c.skip_ws();
  if (!c.done()) c.fail("trailing input after shape");
  validate_shape(s, max_levels);
  return s;
}

// ---------------------------------------------------------------------------
// Validation

bool prefix_is_point(const Shape& s, int level_index) {
  for (int i = 0; i < level_index; ++i) {
    const Occupancy& o = s.levels[static_cast<std::size_t>(i)].occ;
    if (o.kind != OccKind::Discrete || o.values.size() != 1) return false;
  }
  return true;
}

void validate_shape(const Shape& s, int max_levels) {
  if (s.level_count() == 0)
    throw ValidationError(ValidationCode::empty_shape, "shape has no levels");
  if (s.level_count() > max_levels)
    throw ValidationError(ValidationCode::too_many_levels,
                          "shape exceeds " + std::to_string(max_levels) +
                              " levels");
  for (int i = 0; i < s.level_count(); ++i) {
    const Level& lv = s.levels[static_cast<std::size_t>(i)];
    const GroupSpec& g = lv.group;
    const Occupancy& o = lv.occ;
    const std::string at = " at level " + std::to_string(i + 1);

    if (g.kind == GroupKind::Rot && g.order < 2)
      throw ValidationError(ValidationCode::invalid_group,
                            "rotation order must be >= 2" + at);
    if (g.kind == GroupKind::Scale && !(g.factor > 0.0))
      throw ValidationError(ValidationCode::invalid_group,
                            "scale factor must be > 0" + at);

    switch (o.kind) {
      case OccKind::Discrete: {
        if (o.values.empty())
          throw ValidationError(ValidationCode::empty_occupancy,
                                "empty occupancy" + at);
        const bool integral_indices = g.kind == GroupKind::Rot ||
                                      g.kind == GroupKind::Mirror ||
                                      g.kind == GroupKind::Scale;
        for (const double v : o.values) {
          if (integral_indices && !is_integral_value(v))
            throw ValidationError(ValidationCode::non_integral_index,
                                  "fractional index" + at);
          if (g.kind == GroupKind::Rot && (v < 0 || v >= g.order))
            throw ValidationError(ValidationCode::rot_index_out_of_range,
                                  "rotation index out of [0, n)" + at);
          if (g.kind == GroupKind::Mirror && v != 0.0 && v != 1.0)
            throw ValidationError(ValidationCode::mirror_index_out_of_range,
                                  "mirror index must be 0 or 1" + at);
        }
        if ((g.kind == GroupKind::TransX || g.kind == GroupKind::TransY) &&
            o.values.size() == 2 && !is_integral_value(o.values[0]) &&
            !is_integral_value(o.values[1]))
          throw ValidationError(
              ValidationCode::ambiguous_occupancy,
              "two non-integer offsets would serialize as an interval" + at);
        break;
      }
      case OccKind::Interval: {
        if (g.kind != GroupKind::TransX && g.kind != GroupKind::TransY)
          throw ValidationError(ValidationCode::interval_on_non_translation,
                                "interval occupancy on a non-translation level" + at);
        if (!(o.lo < o.hi))
          throw ValidationError(ValidationCode::interval_malformed,
                                "interval bounds must be increasing" + at);
        break;
      }
      case OccKind::Full:
        if (g.kind == GroupKind::Scale)
          throw ValidationError(ValidationCode::full_on_scale,
                                "the scale group has no full occupancy" + at);
        break;
    }

    if (o.continuous_on(g) && !prefix_is_point(s, i))
      throw ValidationError(
          ValidationCode::continuous_fiber,
          "continuous occupancy above a non-point fiber" + at);
  }
}

// ---------------------------------------------------------------------------
// Canonicalization

namespace {

bool occupies_all_rotations(const Level& lv) {
  if (lv.group.kind != GroupKind::Rot) return false;
  if (lv.occ.kind == OccKind::Full) return true;
  if (lv.occ.kind != OccKind::Discrete) return false;
  if (lv.occ.values.size() != static_cast<std::size_t>(lv.group.order))
    return false;
  for (int k = 0; k < lv.group.order; ++k)
    if (lv.occ.values[static_cast<std::size_t>(k)] != static_cast<double>(k))
      return false;
  return true;
}

bool is_single(const Level& lv) {
  return lv.occ.kind == OccKind::Discrete && lv.occ.values.size() == 1;
}

// One simplification pass; returns true if anything changed.
bool canonicalize_pass(Shape& s) {
  bool changed = false;

  // Reduce rotation indices mod n, then re-sort/dedupe.
  for (Level& lv : s.levels) {
    if (lv.group.kind != GroupKind::Rot || lv.occ.kind != OccKind::Discrete)
      continue;
    bool needs = false;
    for (const double v : lv.occ.values)
      if (is_integral_value(v) && (v < 0 || v >= lv.group.order)) needs = true;
    if (!needs) continue;
    std::vector<double> reduced;
    reduced.reserve(lv.occ.values.size());
    for (const double v : lv.occ.values) {
      if (!is_integral_value(v)) {
        reduced.push_back(v);
        continue;
      }
      const long long n = lv.group.order;
      const long long k = static_cast<long long>(v);
      reduced.push_back(static_cast<double>(((k % n) + n) % n));
    }
    lv.occ = Occupancy::discrete(std::move(reduced));
    changed = true;
  }

  // Drop identity mirror levels.
  for (std::size_t i = 0; i < s.levels.size();) {
    const Level& lv = s.levels[i];
    if (lv.group.kind == GroupKind::Mirror && lv.occ.kind == OccKind::Discrete &&
        lv.occ.values == std::vector<double>{0.0}) {
      s.levels.erase(s.levels.begin() + static_cast<std::ptrdiff_t>(i));
      changed = true;
    } else {
      ++i;
    }
  }

  // Merge adjacent levels.
  for (std::size_t i = 0; i + 1 < s.levels.size();) {
    Level& a = s.levels[i];
    Level& b = s.levels[i + 1];
    // Two stacked all-occupied rotations generate the lcm-order rotation.
    if (occupies_all_rotations(a) && occupies_all_rotations(b)) {
      const long long l = std::lcm<long long>(a.group.order, b.group.order);
      a.group = GroupSpec::rot(static_cast<int>(l));
      a.occ = Occupancy::full();
      s.levels.erase(s.levels.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      changed = true;
      continue;
    }
    // Two stacked single offsets along the same axis sum.
    if (a.group.kind == b.group.kind &&
        (a.group.kind == GroupKind::TransX ||
         a.group.kind == GroupKind::TransY) &&
        is_single(a) && is_single(b)) {
      a.occ = Occupancy::single(a.occ.values[0] + b.occ.values[0]);
      s.levels.erase(s.levels.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      changed = true;
      continue;
    }
    ++i;
  }

  return changed;
}

}  // namespace

Shape canonicalize(const Shape& s) {
  Shape out = s;
  while (canonicalize_pass(out)) {
  }
  return out;
}

Shape regular_polygon_control(int n, double t, double h) {
  if (n < 3) throw std::invalid_argument("regular_polygon_control: n must be >= 3");
  if (!(t > 0.0)) throw std::invalid_argument("regular_polygon_control: t must be > 0");
  if (!(h > 0.0)) throw std::invalid_argument("regular_polygon_control: h must be > 0");
  const double l = h * std::tan(M_PI / n) / t;
  Shape s;
  s.levels = {
      {GroupSpec::scale_group(l), Occupancy::single(-1.0)},
      {GroupSpec::trans(Axis::X), Occupancy::interval(-t, t)},
      {GroupSpec::scale_group(l), Occupancy::single(1.0)},
      {GroupSpec::trans(Axis::Y), Occupancy::single(h)},
      {GroupSpec::rot(n), [&] {
         std::vector<double> v;
         v.reserve(static_cast<std::size_t>(n));
         for (int k = 0; k < n; ++k) v.push_back(k);
         return Occupancy::discrete(std::move(v));
       }()},
  };
  return s;
}

}  // namespace wreath
