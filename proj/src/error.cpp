#include "glmebic/error.hpp"

namespace glmebic {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgs: return "InvalidArgs";
    case ErrorCode::UnsupportedPair: return "UnsupportedPair";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DataError: return "DataError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::PathEmpty: return "PathEmpty";
    case ErrorCode::InvalidDesign: return "InvalidDesign";
    case ErrorCode::InvalidRho: return "InvalidRho";
    case ErrorCode::FoldTooSmall: return "FoldTooSmall";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace glmebic
