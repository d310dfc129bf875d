#include "qsdyn/error.hpp"

namespace qsdyn {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::MalformedKernel: return "MalformedKernel";
    case ErrorCode::DegenerateFitness: return "DegenerateFitness";
    case ErrorCode::SingularDenominator: return "SingularDenominator";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::DriftExceeded: return "DriftExceeded";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InaccurateInputs: return "InaccurateInputs";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace qsdyn
