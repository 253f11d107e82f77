#include "statesel/error.hpp"

namespace statesel {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateChannel: return "DuplicateChannel";
    case ErrorCode::MissingChannel: return "MissingChannel";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidManifest: return "InvalidManifest";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateSnapshots: return "DegenerateSnapshots";
    case ErrorCode::PoolTooLarge: return "PoolTooLarge";
    case ErrorCode::UnstableSystem: return "UnstableSystem";
    case ErrorCode::OutputExists: return "OutputExists";
  }
  return "Unknown";
}

}  // namespace statesel
