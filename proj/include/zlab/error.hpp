#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zlab {

enum class ErrorCode {
  invalid_argument,
  non_finite,
  negative_height,
  out_of_range,
  bracket_failure,
  integrand_not_finite,
  tower_escape,
  delta_excluded,
  delta_trivial,
  width_out_of_range,
  height_below_floor,
  partition_invalid,
  degenerate_denominator,
  io_error,
  format_error,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::negative_height: return "negative_height";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::bracket_failure: return "bracket_failure";
    case ErrorCode::integrand_not_finite: return "integrand_not_finite";
    case ErrorCode::tower_escape: return "tower_escape";
    case ErrorCode::delta_excluded: return "delta_excluded";
    case ErrorCode::delta_trivial: return "delta_trivial";
    case ErrorCode::width_out_of_range: return "width_out_of_range";
    case ErrorCode::height_below_floor: return "height_below_floor";
    case ErrorCode::partition_invalid: return "partition_invalid";
    case ErrorCode::degenerate_denominator: return "degenerate_denominator";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::format_error: return "format_error";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace zlab
