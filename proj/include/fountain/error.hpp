#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fountain {

enum class ErrorCode {
  invalid_argument,
  degenerate_amplitude,
  degenerate_contrast,
  accuracy_not_reached,
  no_atoms,
  slope_degenerate,
  vertex_undetermined,
  insufficient_scan,
  ambiguous_calibration,
  invalid_ratio,
  parse_error,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an iterative integrator or ensemble stops before reaching the
/// requested tolerance. Carries the best available estimate.
class AccuracyNotReached : public Error {
 public:
  AccuracyNotReached(const std::string& what, double best_estimate, double error_estimate)
      : Error(ErrorCode::accuracy_not_reached, what),
        best_estimate_(best_estimate),
        error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace fountain
