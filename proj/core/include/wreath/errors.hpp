#pragma once

#include <stdexcept>
#include <string>

namespace wreath {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid group construction (rotation order < 2, non-positive scale factor, ...).
struct InvalidGroupError : Error {
  using Error::Error;
};

/// Syntax error while parsing the shape DSL. Positions are 1-based.
struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& what, int line_, int col_)
      : Error(what + " (line " + std::to_string(line_) + ", column " +
              std::to_string(col_) + ")"),
        line(line_),
        column(col_) {}
};

/// Structural validation failure of a syntactically well-formed shape.
enum class ValidationCode {
  empty_shape,
  empty_occupancy,
  rot_index_out_of_range,
  mirror_index_out_of_range,
  interval_on_non_translation,
  interval_malformed,
  continuous_fiber,       // continuous occupancy above a non-point fiber
  too_many_levels,
  non_integral_index,     // fractional index on a finite-index group
  ambiguous_occupancy,    // 2-element non-integral discrete translation set
  invalid_group,
  full_on_scale,          // the scale group has no finite full occupancy
};

struct ValidationError : Error {
  ValidationCode code;
  ValidationError(ValidationCode c, const std::string& what) : Error(what), code(c) {}
};

/// Noise tree does not match the shape it is being used with.
struct ShapeMismatchError : Error {
  using Error::Error;
};

/// Unfolding aborted (point-count guard tripped or unexpected structure).
struct UnfoldError : Error {
  using Error::Error;
};

/// Prior sampling failed to produce a valid draw within its retry budget.
struct PriorSamplingError : Error {
  using Error::Error;
};

/// File IO failures, with a machine-readable reason.
enum class IoCode {
  missing_file,
  malformed_image,
  malformed_record,
  unwritable_path,
};

struct IoError : Error {
  IoCode code;
  IoError(IoCode c, const std::string& what) : Error(what), code(c) {}
};

}  // namespace wreath
