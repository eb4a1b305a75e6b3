#pragma once

#include <stdexcept>
#include <string>

namespace fgmpc {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kEmptySet,
  kInfeasible,
  kOutsideRoa,
  kProjectionIntractable,
  kNoFeasibleHorizon,
  kNotFinitelyDetermined,
  kAssumptionViolated,
  kNonConvergence,
  kSolverFailure,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable category. Every failure raised by the
/// library is an Error; the C API maps the code onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fgmpc
