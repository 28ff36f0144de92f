#include "brw/error.hpp"

namespace brw {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyKernel: return "EmptyKernel";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::NonPositiveAngular: return "NonPositiveAngular";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CoincidentSources: return "CoincidentSources";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::NotTransient: return "NotTransient";
    case ErrorCode::Subcritical: return "Subcritical";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::NonPositiveSample: return "NonPositiveSample";
    case ErrorCode::NonPositiveValues: return "NonPositiveValues";
    case ErrorCode::BoxTooSmall: return "BoxTooSmall";
    case ErrorCode::OutOfMemoryBudget: return "OutOfMemoryBudget";
    case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
    case ErrorCode::ConfigParse: return "ConfigParse";
    case ErrorCode::ToleranceNotReached: return "ToleranceNotReached";
    case ErrorCode::GapNotResolved: return "GapNotResolved";
    case ErrorCode::BracketNotFound: return "BracketNotFound";
    case ErrorCode::InsufficientAsymptoticRange: return "InsufficientAsymptoticRange";
    case ErrorCode::CapExceededEverywhere: return "CapExceededEverywhere";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ToleranceNotReached:
    case ErrorCode::GapNotResolved:
    case ErrorCode::BracketNotFound:
    case ErrorCode::InsufficientAsymptoticRange:
    case ErrorCode::CapExceededEverywhere:
      return false;
    default:
      return true;
  }
}

}  // namespace brw
