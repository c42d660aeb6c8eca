// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "faasflow/clock.hpp"
#include "faasflow/function.hpp"
#include "faasflow/latency.hpp"

namespace faasflow {

struct InvocationId {
  std::uint64_t value = 0;
  auto operator<=>(const InvocationId&) const = default;
};

enum class InvocationState { Pending, Running, Suspended, Completed, Failed };

std::string_view to_string(InvocationState state) noexcept;

/// Half-open interval [from, to) of virtual time.
struct Interval {
  Millis from = 0;
  Millis to = 0;
  [[nodiscard]] Millis length() const noexcept { return to - from; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct InvocationRecord {
  InvocationId id;
  std::string function;
  std::optional<InvocationId> parent;
  std::uint64_t execution = 0;  // workflow execution that issued it (0: none)
  std::string path;             // composition node that issued it
  bool orchestrator = false;
  Millis submit_time = 0;
  Millis start_time = 0;
  Millis end_time = 0;
  std::vector<Interval> billed_intervals;
  std::vector<Interval> suspended_gaps;
  InvocationState state = InvocationState::Pending;
  std::size_t input_bytes = 0;
  std::size_t output_bytes = 0;
  Payload output;
  std::string error;

  [[nodiscard]] Millis billed_ms() const noexcept;
  [[nodiscard]] bool finished() const noexcept {
    return state == InvocationState::Completed || state == InvocationState::Failed;
  }
  friend bool operator==(const InvocationRecord&, const InvocationRecord&) = default;
};

struct Event {
  std::string key;
  Payload payload;
  Millis fire_time = 0;
};

struct RuntimeOptions {
  Millis suspend_limit_ms = 24LL * 60 * 60 * 1000;
  std::uint64_t action_budget = VirtualClock::kDefaultActionBudget;
  std::uint64_t seed = 0;  // jitter stream
};

struct StartOptions {
  std::optional<InvocationId> parent;
  std::uint64_t execution = 0;
  std::string path;
  std::optional<std::size_t> payload_limit;  // limit imposed by the caller
};

/// Counters accumulated by engines running on this runtime.
struct RuntimeMetrics {
  std::uint64_t transitions = 0;
  std::uint64_t history_bytes = 0;
};

using Completion = std::function<void(const InvocationRecord&)>;

class Runtime;

/// Handle through which a Native function body drives its own invocation.
/// Cheap to copy; valid for the lifetime of the runtime.
class InvocationContext {
 public:
  InvocationContext(Runtime& runtime, InvocationId id) : runtime_(&runtime), id_(id) {}

  [[nodiscard]] InvocationId id() const noexcept { return id_; }
  [[nodiscard]] Runtime& runtime() const noexcept { return *runtime_; }
  [[nodiscard]] const Payload& input() const;
  [[nodiscard]] Millis now() const;

  /// Stays Running (and billed) for `duration`, then calls `then`.
  void compute(Millis duration, std::function<void()> then) const;
  /// Self-suspension; see Runtime::suspend.
  void suspend(const std::string& key, std::function<void(Payload)> on_resume) const;
  void complete(Payload output) const;
  void fail(std::string error) const;

 private:
  Runtime* runtime_;
  InvocationId id_;
};

/// Deterministic simulated FaaS platform: function registry, invocation
/// lifecycle with billing intervals, suspension, and an event bus, all
/// driven by one VirtualClock.
///
/// Not thread-safe; independent runtimes share no state.
class Runtime {
 public:
  explicit Runtime(LatencyModel latency = {}, RuntimeOptions options = {});
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  std::string register_function(FunctionDef def);
  [[nodiscard]] bool has_function(std::string_view name) const;

  /// Introspection of a registered function. Orchestration engines never
  /// call this; calls against sealed functions are counted so a verifier
  /// can prove that.
  const FunctionDef& describe(std::string_view name);
  // Marks a registered function sealed; later describe() calls are counted.
  void seal(std::string_view name);
  [[nodiscard]] std::uint64_t introspections() const noexcept { return introspections_; }

  /// Submits an invocation. Dispatch takes invoke_latency_ms; the function
  /// then runs for its behavior duration plus the input transfer cost.
  /// Throws UnknownFunction / PayloadTooLarge synchronously.
  InvocationId start(std::string_view function, Payload input, StartOptions options,
                     Completion on_done);

  /// Synchronous invocation from outside the event loop: runs the simulation
  /// until the invocation finishes and returns its record.
  InvocationRecord invoke(std::string_view function, Payload input,
                          std::optional<InvocationId> caller = std::nullopt);

  /// Starts `function`; when it finishes, publishes Event(completion_key,
  /// output) after queue_latency_ms (+ log_write_ms unless active-ack).
  InvocationId invoke_async(std::string_view function, Payload input,
                            std::string completion_key, StartOptions options = {});

  /// Self-suspension of a Running invocation. Billing stops until an event
  /// on `key` arrives; an already-latched event resumes it immediately.
  void suspend(InvocationId invocation, const std::string& key,
               std::function<void(Payload)> on_resume);

  /// Resumes every invocation suspended on event.key (after queue latency);
  /// with no waiters the payload is latched for the key.
  std::vector<InvocationId> trigger_event(Event event);

  /// Schedules trigger_event after `delay`.
  void publish_after(Millis delay, Event event);

  Millis run_until_idle() { return clock_.run_until_idle(); }

  [[nodiscard]] Millis now() const noexcept { return clock_.now(); }
  [[nodiscard]] VirtualClock& clock() noexcept { return clock_; }
  [[nodiscard]] const LatencyModel& latency() const noexcept { return latency_; }
  [[nodiscard]] const RuntimeOptions& options() const noexcept { return options_; }
  [[nodiscard]] RuntimeMetrics& metrics() noexcept { return metrics_; }

  /// Rounds a (jittered) base latency to integer milliseconds.
  Millis delay(double base_ms);
  /// A message hop: base latency plus payload transfer and cliff costs.
  Millis hop(double base_ms, std::size_t payload_bytes);

  [[nodiscard]] const InvocationRecord& record(InvocationId id) const;
  [[nodiscard]] std::vector<InvocationRecord> trace() const;
  [[nodiscard]] std::size_t invocation_count() const noexcept { return slots_.size(); }

  std::uint64_t next_execution_id() noexcept { return ++last_execution_; }
  std::string unique_key(std::string_view prefix);

  // Used by InvocationContext.
  void compute(InvocationId id, Millis duration, std::function<void()> then);
  void complete(InvocationId id, Payload output);
  void fail(InvocationId id, std::string error);
  [[nodiscard]] const Payload& input_of(InvocationId id) const;

 private:
  struct Slot {
    InvocationRecord record;
    Payload input;
    Completion on_done;
    Millis open_since = 0;
    Millis suspended_since = 0;
    std::function<void(Payload)> on_resume;
    std::optional<TimerToken> timeout;
  };

  Slot& slot(InvocationId id);
  const Slot& slot(InvocationId id) const;
  void begin(InvocationId id);
  void run_script(InvocationId id, std::size_t step, Payload working);
  void finish(InvocationId id, bool ok, Payload output, std::string error);
  void resume(InvocationId id, Payload payload);
  void close_billing(Slot& s);

  LatencyModel latency_;
  RuntimeOptions options_;
  VirtualClock clock_;
  std::mt19937_64 rng_;
  std::map<std::string, FunctionDef, std::less<>> registry_;
  std::map<std::string, int, std::less<>> invocation_counts_;
  std::deque<Slot> slots_;
  std::map<std::string, std::vector<InvocationId>> waiters_;
  std::map<std::string, Payload> latched_;
  RuntimeMetrics metrics_;
  std::uint64_t introspections_ = 0;
  std::uint64_t last_execution_ = 0;
  std::uint64_t key_counter_ = 0;
};

/// Newline-delimited JSON, one InvocationRecord per line.
void write_trace(std::ostream& out, const std::vector<InvocationRecord>& trace);
std::vector<InvocationRecord> read_trace(std::istream& in);

}  // namespace faasflow
