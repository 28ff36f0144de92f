#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brw {

enum class ErrorCode {
  // validation
  EmptyKernel,
  NotIrreducible,
  NegativeRate,
  AlphaOutOfRange,
  NonPositiveAngular,
  InvalidArgument,
  CoincidentSources,
  PreconditionViolated,
  NotTransient,
  Subcritical,
  DomainError,
  UnsupportedRegime,
  UnsupportedDimension,
  NonPositiveSample,
  NonPositiveValues,
  BoxTooSmall,
  OutOfMemoryBudget,
  UnknownSubcommand,
  ConfigParse,
  // numerical
  ToleranceNotReached,
  GapNotResolved,
  BracketNotFound,
  InsufficientAsymptoticRange,
  CapExceededEverywhere,
};

std::string_view error_name(ErrorCode code);

/// True for errors caused by bad input rather than by a numerical procedure
/// failing to meet its tolerance.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace brw
