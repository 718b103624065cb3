#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bellkit {

enum class ErrorCode {
  invalid_input,
  quantum_bound_exceeded,
  undefined_correlator,
  infeasible,
  not_converged,
  normalization_violation,
  out_of_order,
  io,
  config,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the message is a single line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bellkit
