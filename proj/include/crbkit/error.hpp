#pragma once

#include <stdexcept>
#include <string>

namespace crbkit {

enum class ErrorCode {
  InvalidMatrix,
  InvalidInput,
  InvalidModel,
  RankDeficientConstraint,
  FullRankFim,
  NotMinimumConstraint,
  SingularRestriction,
  SamplingExhausted,
  NumericalFailure,
  DegenerateParameter,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this exception type; the code
// is stable and is what the C API maps onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crbkit
