#pragma once

#include <stdexcept>
#include <string>

namespace smlab {

enum class ErrorCode {
  invalid_argument,
  domain_mismatch,
  grid_mismatch,
  support_violation,
  off_lattice,
  covering_not_achieved,
  no_transverse_direction,
  aliasing,
  pole_margin,
  non_unit,
  range_violation,
  divergence,
  window_too_short,
  unrepresentable,
  config,
  io,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::domain_mismatch: return "domain_mismatch";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::support_violation: return "support_violation";
    case ErrorCode::off_lattice: return "off_lattice";
    case ErrorCode::covering_not_achieved: return "covering_not_achieved";
    case ErrorCode::no_transverse_direction: return "no_transverse_direction";
    case ErrorCode::aliasing: return "aliasing";
    case ErrorCode::pole_margin: return "pole_margin";
    case ErrorCode::non_unit: return "non_unit";
    case ErrorCode::range_violation: return "range_violation";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::window_too_short: return "window_too_short";
    case ErrorCode::unrepresentable: return "unrepresentable";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace smlab
