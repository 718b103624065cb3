#include "bellkit/error.hpp"

namespace bellkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::quantum_bound_exceeded: return "quantum_bound_exceeded";
    case ErrorCode::undefined_correlator: return "undefined_correlator";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::normalization_violation: return "normalization_violation";
    case ErrorCode::out_of_order: return "out_of_order";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

}  // namespace bellkit
