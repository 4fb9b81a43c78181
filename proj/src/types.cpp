#include "hbmgreen/types.hpp"

#include <cmath>

namespace hbmgreen {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OrderOutOfRange: return "OrderOutOfRange";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::ArgumentOrderViolated: return "ArgumentOrderViolated";
    case ErrorCode::ExponentOutOfRange: return "ExponentOutOfRange";
    case ErrorCode::InversionUnstable: return "InversionUnstable";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::QuadratureNonConvergent: return "QuadratureNonConvergent";
    case ErrorCode::ConvolutionGridTooCoarse: return "ConvolutionGridTooCoarse";
    case ErrorCode::NegativeDensityBeyondTolerance: return "NegativeDensityBeyondTolerance";
    case ErrorCode::BarrierNotUnit: return "BarrierNotUnit";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BelowBarrier: return "BelowBarrier";
    case ErrorCode::DiagonalSingularity: return "DiagonalSingularity";
    case ErrorCode::DimensionTooLow: return "DimensionTooLow";
    case ErrorCode::StepTooCoarse: return "StepTooCoarse";
    case ErrorCode::SpecParseError: return "SpecParseError";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

const char* to_string(Method m) {
  switch (m) {
    case Method::Quadrature: return "quadrature";
    case Method::Inversion: return "inversion";
    case Method::ClosedForm: return "closed-form";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

double EvalResult::rel_err() const {
  return value == 0.0 ? abs_err : abs_err / std::abs(value);
}

}  // namespace hbmgreen
