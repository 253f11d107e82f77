#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace statesel {

enum class ErrorCode {
  InvalidArgument,
  DuplicateChannel,
  MissingChannel,
  UnknownChannel,
  RaggedRow,
  NonFiniteValue,
  ParseError,
  IoError,
  InvalidManifest,
  TooShort,
  DimensionMismatch,
  DegenerateSnapshots,
  PoolTooLarge,
  UnstableSystem,
  OutputExists,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers what went wrong
/// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace statesel
