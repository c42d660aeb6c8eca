// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "faasflow/clock.hpp"

namespace faasflow {

class Config;

/// Extra delay charged on every transition whose payload reaches a size
/// threshold (models platforms that degrade sharply for large state).
struct PayloadCliff {
  std::size_t threshold_bytes = 0;
  Millis extra_delay_ms = 0;
  friend bool operator==(const PayloadCliff&, const PayloadCliff&) = default;
};

/// Platform latency parameters. Fractional milliseconds are allowed; every
/// individual delay is rounded to the nearest integer millisecond when it
/// is scheduled.
struct LatencyModel {
  double invoke_latency_ms = 0;   // dispatch of one function
  double queue_latency_ms = 0;    // event-bus / message-queue delivery
  double log_write_ms = 0;        // persisting one transition or history event
  double per_kb_transfer_ms = 0;  // payload serialization cost per KiB
  bool active_ack_bypass = false; // results skip the log write when true
  std::optional<PayloadCliff> large_payload_cliff;
  double jitter = 0;              // seeded uniform noise, +/- fraction of base

  static LatencyModel zero() { return {}; }

  /// Reads the exact keys invoke_latency_ms, queue_latency_ms, log_write_ms,
  /// per_kb_transfer_ms, active_ack_bypass, cliff_threshold_bytes,
  /// cliff_delay_ms (and jitter) from section [latency] or the top level.
  static LatencyModel from_config(const Config& config, const LatencyModel& base);
  static LatencyModel from_config(const Config& config);

  /// Throws ConfigError when any latency is negative.
  void validate() const;

  /// Linear serialization cost for `bytes` of payload.
  [[nodiscard]] Millis payload_ms(std::size_t bytes) const;

  /// Cliff delay for a transition carrying `bytes` (0 below the threshold).
  [[nodiscard]] Millis cliff_ms(std::size_t bytes) const;

  /// Delay for delivering a completion: queue, plus a log write unless the
  /// active-ack path is enabled.
  [[nodiscard]] double delivery_base_ms() const {
    return queue_latency_ms + (active_ack_bypass ? 0.0 : log_write_ms);
  }

  [[nodiscard]] std::string to_config_text() const;

  friend bool operator==(const LatencyModel&, const LatencyModel&) = default;
};

}  // namespace faasflow
