#pragma once

#include <stdexcept>
#include <string>

namespace tma {

// Numeric values match the TMA_ERR_* codes of the C API.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  nonfinite_value = 2,
  empty_domain = 3,
  malformed_file = 4,
  degenerate_input = 5,
  no_convergence = 6,
  infeasible_boundary = 7,
  alpha_out_of_range = 8,
  section_not_compact = 9,
  degenerate_polygon = 10,
  divide_by_zero_mass = 11,
  domain_too_small = 12,
  config_invalid = 13,
  io_error = 14,
  internal = 15,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by solve() when the iteration budget runs out; carries the residual
// reached so callers can report it.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& message, double residual)
      : Error(ErrorCode::no_convergence, message), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// MalformedFile with the 1-based line number where parsing stopped.
class MalformedFile : public Error {
 public:
  MalformedFile(const std::string& message, int line)
      : Error(ErrorCode::malformed_file,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// Valid exponent range of the flow: 0 < alpha < 1/4.
void require_alpha(double alpha);

}  // namespace tma
