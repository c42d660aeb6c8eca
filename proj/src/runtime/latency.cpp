// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/latency.hpp"

#include <cmath>
#include <sstream>

#include "faasflow/config.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

LatencyModel LatencyModel::from_config(const Config& config) { return from_config(config, LatencyModel{}); }

LatencyModel LatencyModel::from_config(const Config& config,
                                       const LatencyModel& base) {
  LatencyModel m = base;
  const std::string s = "latency";
  m.invoke_latency_ms = config.number_or(s, "invoke_latency_ms", m.invoke_latency_ms);
  m.queue_latency_ms = config.number_or(s, "queue_latency_ms", m.queue_latency_ms);
  m.log_write_ms = config.number_or(s, "log_write_ms", m.log_write_ms);
  m.per_kb_transfer_ms = config.number_or(s, "per_kb_transfer_ms", m.per_kb_transfer_ms);
  m.active_ack_bypass = config.flag(s, "active_ack_bypass").value_or(m.active_ack_bypass);
  m.jitter = config.number_or(s, "jitter", m.jitter);

  const auto threshold = config.number(s, "cliff_threshold_bytes");
  const auto delay = config.number(s, "cliff_delay_ms");
  if (threshold.has_value() != delay.has_value()) {
    throw Error(ErrorCode::ConfigError,
                "cliff_threshold_bytes and cliff_delay_ms must be given together");
  }
  if (threshold) {
    if (*threshold < 0 || *delay < 0) {
      throw Error(ErrorCode::ConfigError, "payload cliff values must be >= 0");
    }
    m.large_payload_cliff = PayloadCliff{static_cast<std::size_t>(*threshold),
                                         static_cast<Millis>(std::llround(*delay))};
  }
  m.validate();
  return m;
}

void LatencyModel::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::ConfigError, std::string(name) + " must be >= 0");
    }
  };
  check(invoke_latency_ms, "invoke_latency_ms");
  check(queue_latency_ms, "queue_latency_ms");
  check(log_write_ms, "log_write_ms");
  check(per_kb_transfer_ms, "per_kb_transfer_ms");
  check(jitter, "jitter");
  if (jitter >= 1.0) throw Error(ErrorCode::ConfigError, "jitter must be < 1");
}

Millis LatencyModel::payload_ms(std::size_t bytes) const {
  return std::llround(per_kb_transfer_ms * static_cast<double>(bytes) / 1024.0);
}

Millis LatencyModel::cliff_ms(std::size_t bytes) const {
  if (large_payload_cliff && bytes >= large_payload_cliff->threshold_bytes &&
      bytes > 0) {
    return large_payload_cliff->extra_delay_ms;
  }
  return 0;
}

std::string LatencyModel::to_config_text() const {
  std::ostringstream out;
  out << "[latency]\n"
      << "invoke_latency_ms = " << invoke_latency_ms << '\n'
      << "queue_latency_ms = " << queue_latency_ms << '\n'
      << "log_write_ms = " << log_write_ms << '\n'
      << "per_kb_transfer_ms = " << per_kb_transfer_ms << '\n'
      << "active_ack_bypass = " << (active_ack_bypass ? "true" : "false") << '\n';
  if (large_payload_cliff) {
    out << "cliff_threshold_bytes = " << large_payload_cliff->threshold_bytes << '\n'
        << "cliff_delay_ms = " << large_payload_cliff->extra_delay_ms << '\n';
  }
  if (jitter > 0) out << "jitter = " << jitter << '\n';
  return out.str();
}

}  // namespace faasflow
