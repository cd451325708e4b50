#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace propgraph {

enum class ErrorCode {
  EmptyText,
  UnknownNode,
  NotNormalized,
  DimensionMismatch,
  InvalidArgument,
  EmptyCandidates,
  VersionMismatch,
  CorruptFile,
  IoError,
  ExtractionFailed,
  BackendUnavailable,
  ConfigError,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so that
/// callers (and tests) can dispatch on the kind of failure without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace propgraph
