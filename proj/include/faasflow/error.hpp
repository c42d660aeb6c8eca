// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace faasflow {

enum class ErrorCode {
  // runtime
  DuplicateName,
  UnknownFunction,
  PayloadTooLarge,
  NotRunning,
  SuspendLimitExceeded,
  LivelockGuard,
  // workflow model
  InvalidCount,
  ParseError,
  ValidationError,
  UnsupportedState,
  // engines
  StateTooLarge,
  RateLimited,
  TooManyActions,
  ParallelUnsupported,
  UnsupportedConstruct,
  NondeterminismDetected,
  CompositionNotFunction,
  WorkflowFailed,
  // benchmarks
  IncompleteTrace,
  // configuration and I/O
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (tests, the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse errors additionally carry the byte offset into the document.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(ErrorCode::ParseError,
              "at byte " + std::to_string(position) + ": " + message),
        position_(position) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace faasflow
