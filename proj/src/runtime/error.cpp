// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/error.hpp"

namespace faasflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::PayloadTooLarge: return "PayloadTooLarge";
    case ErrorCode::NotRunning: return "NotRunning";
    case ErrorCode::SuspendLimitExceeded: return "SuspendLimitExceeded";
    case ErrorCode::LivelockGuard: return "LivelockGuard";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnsupportedState: return "UnsupportedState";
    case ErrorCode::StateTooLarge: return "StateTooLarge";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TooManyActions: return "TooManyActions";
    case ErrorCode::ParallelUnsupported: return "ParallelUnsupported";
    case ErrorCode::UnsupportedConstruct: return "UnsupportedConstruct";
    case ErrorCode::NondeterminismDetected: return "NondeterminismDetected";
    case ErrorCode::CompositionNotFunction: return "CompositionNotFunction";
    case ErrorCode::WorkflowFailed: return "WorkflowFailed";
    case ErrorCode::IncompleteTrace: return "IncompleteTrace";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace faasflow
