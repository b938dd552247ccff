#include "kdvlab/error.hpp"

namespace kdvlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OddPointCount: return "OddPointCount";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DivisionByZeroNorm: return "DivisionByZeroNorm";
    case ErrorCode::NearSingularOperator: return "NearSingularOperator";
    case ErrorCode::SeriesNotContracting: return "SeriesNotContracting";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::NonPositiveGreens: return "NonPositiveGreens";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::KappaTooSmall: return "KappaTooSmall";
    case ErrorCode::NonUniformSaveInterval: return "NonUniformSaveInterval";
    case ErrorCode::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::UnresolvedKernel: return "UnresolvedKernel";
    case ErrorCode::BottomTooShallow: return "BottomTooShallow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

} // namespace kdvlab
