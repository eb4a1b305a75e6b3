#include "fgmpc/error.hpp"

namespace fgmpc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kDimensionMismatch:
      return "dimension mismatch";
    case ErrorCode::kEmptySet:
      return "empty set";
    case ErrorCode::kInfeasible:
      return "infeasible";
    case ErrorCode::kOutsideRoa:
      return "outside region of attraction";
    case ErrorCode::kProjectionIntractable:
      return "projection intractable";
    case ErrorCode::kNoFeasibleHorizon:
      return "no feasible horizon";
    case ErrorCode::kNotFinitelyDetermined:
      return "not finitely determined";
    case ErrorCode::kAssumptionViolated:
      return "assumption violated";
    case ErrorCode::kNonConvergence:
      return "non-convergence";
    case ErrorCode::kSolverFailure:
      return "solver failure";
    case ErrorCode::kConfig:
      return "configuration error";
    case ErrorCode::kIo:
      return "i/o error";
  }
  return "unknown";
}

}  // namespace fgmpc
