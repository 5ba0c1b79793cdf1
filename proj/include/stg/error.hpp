#pragma once

#include <stdexcept>
#include <string>

namespace stg {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  invalid_weights,
  invalid_laplacian,
  invalid_problem,
  invalid_temporal_graph,
  degenerate_temporal,
  solver_failure,
  io,
  parse,
  windowing,
  resample_unsupported,
  single_class,
  insufficient_data,
};

// Stable machine-readable name, e.g. "invalid_weights".
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stg
