#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace keystone {

enum class ErrorCode {
  kShapeMismatch,
  kNonFiniteValue,
  kEmptyBatch,
  kDegenerateInput,
  kInsufficientCandidates,
  kInvalidConfig,
  kParseError,
  kRowCountMismatch,
  kIoError,
  kInternal,
};

/// Stable lowercase identifier, used on the wire and in CLI output.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> candidate = std::nullopt)
      : std::runtime_error(message), code_(code), candidate_(candidate) {}

  ErrorCode code() const noexcept { return code_; }
  /// Offending candidate index for validation failures.
  std::optional<std::size_t> candidate() const noexcept { return candidate_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> candidate_;
};

}  // namespace keystone
