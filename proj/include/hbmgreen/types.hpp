#pragma once

#include <stdexcept>
#include <string>

namespace hbmgreen {

enum class ErrorCode {
  OrderOutOfRange,
  NonPositiveArgument,
  ArgumentOrderViolated,
  ExponentOutOfRange,
  InversionUnstable,
  DomainMismatch,
  QuadratureNonConvergent,
  ConvolutionGridTooCoarse,
  NegativeDensityBeyondTolerance,
  BarrierNotUnit,
  DimensionMismatch,
  BelowBarrier,
  DiagonalSingularity,
  DimensionTooLow,
  StepTooCoarse,
  SpecParseError,
  DomainError,
  UnknownSuite,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Every failure in the library is reported through this exception type; the
/// code identifies which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class Method { Quadrature, Inversion, ClosedForm, MonteCarlo };

const char* to_string(Method m);

/// A numerical value with an absolute-error estimate and the kind of
/// computation that produced it.
struct EvalResult {
  double value = 0.0;
  double abs_err = 0.0;
  Method method = Method::ClosedForm;

  double rel_err() const;
};

}  // namespace hbmgreen
