#pragma once

#include <stdexcept>
#include <string>

namespace rescycle {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  index_out_of_range,
  not_in_range,        // right-hand side outside ran(Id - R)
  singular_system,     // I + lambda*M numerically singular
  no_convergence,
  not_a_fixed_point,
  sample_not_in_fi,
  cycle_invalid,
  singular_sum,        // psol is not a singleton
  singular_factor,     // an affine factor is not invertible
  no_fixed_point,
  empty_grid_intersection,
  inconsistent_system,
  parse_error,
  validation_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace rescycle
