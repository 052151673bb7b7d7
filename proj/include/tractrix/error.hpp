#pragma once

#include <stdexcept>
#include <string>

namespace tractrix {

enum class ErrorCode {
  InvalidArgument,
  OutOfDomain,
  SingularChart,
  DomainExit,
  StepTooLarge,
  NoConvergence,
  PoleLengthDrift,
  ShootingLost,
  RecordOverflow,
  MissingJacobi,
  NonPositiveSample,
  DomainViolation,
  PoleTooLong,
  UncertifiedBounds,
  HypothesisViolated,
  LowConfidenceFit,
  Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tractrix
