#ifndef QSDYN_ERROR_HPP
#define QSDYN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace qsdyn {

enum class ErrorCode {
  InvalidArgument = 1,
  InvalidState,
  MalformedKernel,
  DegenerateFitness,
  SingularDenominator,
  Degenerate,
  DriftExceeded,
  StepUnderflow,
  NoConvergence,
  SingularMatrix,
  InaccurateInputs,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure in the library is reported through this type; the code is
/// what the C API hands back to callers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qsdyn

#endif  // QSDYN_ERROR_HPP
