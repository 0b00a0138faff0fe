#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hilltail {

enum class ErrorCode {
  invalid_argument,
  unsupported_for_family,
  insufficient_positive_data,
  sample_too_small,
  no_pivotal_index,
  hypotheses_not_met,
  insufficient_reps,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type.
// The code is stable and machine-checkable; the message carries detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::unsupported_for_family: return "unsupported-for-family";
    case ErrorCode::insufficient_positive_data: return "insufficient-positive-data";
    case ErrorCode::sample_too_small: return "sample-too-small";
    case ErrorCode::no_pivotal_index: return "no-pivotal-index";
    case ErrorCode::hypotheses_not_met: return "hypotheses-not-met";
    case ErrorCode::insufficient_reps: return "insufficient-reps";
  }
  return "unknown";
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace hilltail
