#include "stg/error.hpp"

namespace stg {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::invalid_weights: return "invalid_weights";
    case ErrorCode::invalid_laplacian: return "invalid_laplacian";
    case ErrorCode::invalid_problem: return "invalid_problem";
    case ErrorCode::invalid_temporal_graph: return "invalid_temporal_graph";
    case ErrorCode::degenerate_temporal: return "degenerate_temporal";
    case ErrorCode::solver_failure: return "solver_failure";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::windowing: return "windowing";
    case ErrorCode::resample_unsupported: return "resample_unsupported";
    case ErrorCode::single_class: return "single_class";
    case ErrorCode::insufficient_data: return "insufficient_data";
  }
  return "unknown";
}

}  // namespace stg
