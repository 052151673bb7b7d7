#include "tractrix/error.hpp"

namespace tractrix {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::SingularChart: return "SingularChart";
    case ErrorCode::DomainExit: return "DomainExit";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PoleLengthDrift: return "PoleLengthDrift";
    case ErrorCode::ShootingLost: return "ShootingLost";
    case ErrorCode::RecordOverflow: return "RecordOverflow";
    case ErrorCode::MissingJacobi: return "MissingJacobi";
    case ErrorCode::NonPositiveSample: return "NonPositiveSample";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::PoleTooLong: return "PoleTooLong";
    case ErrorCode::UncertifiedBounds: return "UncertifiedBounds";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::LowConfidenceFit: return "LowConfidenceFit";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace tractrix
