#pragma once

#include <string>
#include <vector>

#include "wreath/geometry.hpp"

namespace wreath {

/// Which one-parameter transformation group a level instantiates.
enum class GroupKind { TransX, TransY, Rot, RotFull, Mirror, Scale };

struct GroupSpec {
  GroupKind kind = GroupKind::TransX;
  int order = 0;        // Rot only, >= 2
  double factor = 1.0;  // Scale only, > 0

  static GroupSpec trans(Axis a) {
    return {a == Axis::X ? GroupKind::TransX : GroupKind::TransY, 0, 1.0};
  }
  static GroupSpec rot(int n) { return {GroupKind::Rot, n, 1.0}; }
  static GroupSpec rot_full() { return {GroupKind::RotFull, 0, 1.0}; }
  static GroupSpec mirror_group() { return {GroupKind::Mirror, 0, 1.0}; }
  static GroupSpec scale_group(double l) { return {GroupKind::Scale, 0, l}; }
};

/// Which elements of the level's index set are occupied.
///  - Discrete: an explicit sorted list. Indices are integers for Rot/Mirror/
///    Scale, reals for Trans (offsets) and RotFull (angles).
///  - Interval: a closed real range of translation offsets (Trans only).
///  - Full: the whole index set. Structurally distinct from a Discrete list
///    that happens to enumerate every index.
enum class OccKind { Discrete, Interval, Full };

struct Occupancy {
  OccKind kind = OccKind::Discrete;
  std::vector<double> values;  // Discrete, sorted ascending
  double lo = 0.0, hi = 0.0;   // Interval

  static Occupancy discrete(std::vector<double> v);
  static Occupancy single(double v) { return discrete({v}); }
  static Occupancy interval(double lo, double hi);
  static Occupancy full() { return {OccKind::Full, {}, 0.0, 0.0}; }

  /// True if the occupied set is a continuum (Interval, or Full on a
  /// continuous group: unit interval on Trans, whole circle on RotFull).
  bool continuous_on(const GroupSpec& g) const;
  /// Number of occupied elements for a discrete occupied set (Full on a
  /// finite group counts its order); continuous sets count as 1 copy.
  int copy_count(const GroupSpec& g) const;
};

struct Level {
  GroupSpec group;
  Occupancy occ;
};

/// An ordered list of levels, innermost (level 1, index 0) first. Level 1
/// acts first on the origin dot; the last level acts last.
struct Shape {
  std::vector<Level> levels;
  int level_count() const { return static_cast<int>(levels.size()); }
};

bool operator==(const GroupSpec&, const GroupSpec&);
bool operator==(const Occupancy&, const Occupancy&);
bool operator==(const Level&, const Level&);
bool operator==(const Shape&, const Shape&);

inline constexpr int kMaxLevels = 8;

/// Parse the textual form, e.g.
///   [(Trans Y,[0.5]); (Trans X,[-0.5,0.5]); (Rot 4,[0..3])]
/// "#" starts a comment; "full" is the Full occupancy; "a..b" is an integer
/// range; "Rot 2pi" (or "Rot 2π") is the continuous rotation group. On a
/// Trans level "[a,b]" parses as an Interval when both numbers are written
/// with a decimal point and as a Discrete pair otherwise; "[c,c]" collapses
/// to the single offset {c}. Throws ParseError (with 1-based line/column) on
/// syntax errors and ValidationError on structural ones.
Shape parse_shape(const std::string& text, int max_levels = kMaxLevels);

/// Inverse of parse_shape; emits the canonical spelling (range sugar for
/// contiguous integer runs of length >= 3, decimal-pointed interval bounds).
/// parse_shape(serialize_shape(s)) == s for every valid shape.
std::string serialize_shape(const Shape& s);

/// Structural checks: occupancies nonempty and in range, intervals only on
/// translation levels, continuous occupancies only above a point fiber (all
/// earlier levels single-element discrete), level count <= max_levels.
void validate_shape(const Shape& s, int max_levels = kMaxLevels);

/// True if every level before `level_index` (0-based) contributes exactly one
/// point, i.e. has a single-element discrete occupancy.
bool prefix_is_point(const Shape& s, int level_index);

/// Normal form: Rot indices reduced mod n / sorted / deduped, identity mirror
/// levels dropped, adjacent all-occupied rotations merged into Rot lcm,
/// adjacent same-axis single translations summed. Idempotent; preserves the
/// noiseless rendering exactly.
Shape canonicalize(const Shape& s);

/// Control shape whose noiseless unfolding is a regular n-gon (n >= 3) with
/// apothem h built from strokes of half-length t: scale down by l, sweep a
/// [-t, t] horizontal stroke, scale back up, push out by h, repeat n-fold,
/// where l = h * tan(pi/n) / t makes adjacent edges meet at the corners.
Shape regular_polygon_control(int n, double t, double h);

}  // namespace wreath
