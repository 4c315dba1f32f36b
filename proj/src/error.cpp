#include "tma/error.hpp"

#include <cmath>

namespace tma {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::nonfinite_value: return "NonfiniteValue";
    case ErrorCode::empty_domain: return "EmptyDomain";
    case ErrorCode::malformed_file: return "MalformedFile";
    case ErrorCode::degenerate_input: return "DegenerateInput";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::infeasible_boundary: return "InfeasibleBoundary";
    case ErrorCode::alpha_out_of_range: return "AlphaOutOfRange";
    case ErrorCode::section_not_compact: return "SectionNotCompact";
    case ErrorCode::degenerate_polygon: return "DegeneratePolygon";
    case ErrorCode::divide_by_zero_mass: return "DivideByZeroMass";
    case ErrorCode::domain_too_small: return "DomainTooSmall";
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::internal: return "Internal";
  }
  return "Unknown";
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.25) || !std::isfinite(alpha)) {
    fail(ErrorCode::alpha_out_of_range,
         "alpha must lie in (0, 1/4), got " + std::to_string(alpha));
  }
}

}  // namespace tma
