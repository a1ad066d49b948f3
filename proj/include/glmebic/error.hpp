#pragma once

#include <stdexcept>
#include <string>

namespace glmebic {

enum class ErrorCode {
  InvalidArgs,
  UnsupportedPair,
  DomainError,
  DataError,
  RankDeficient,
  ZeroDenominator,
  EmptyCandidates,
  PathEmpty,
  InvalidDesign,
  InvalidRho,
  FoldTooSmall,
  NumericalFailure,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception type used throughout the library; `code()` lets callers (the CLI
/// in particular) map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glmebic
