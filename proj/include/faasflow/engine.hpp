// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "faasflow/composition.hpp"
#include "faasflow/runtime.hpp"

namespace faasflow {

class Config;

enum class EngineKind {
  ClientScheduler,     // asf
  ReactiveConductor,   // composer
  SequenceNative,      // sequences
  EventSourcing,       // adf
  SuspendOrchestrator, // suspend
  InlineOrchestrator,  // inline
};

inline constexpr EngineKind kAllEngines[] = {
    EngineKind::ClientScheduler,    EngineKind::ReactiveConductor,   EngineKind::SequenceNative,
    EngineKind::EventSourcing,      EngineKind::SuspendOrchestrator, EngineKind::InlineOrchestrator,
};

/// Short CLI name: asf, composer, sequences, adf, suspend, inline.
std::string_view engine_name(EngineKind kind) noexcept;
/// Inverse of engine_name; throws ValidationError for unknown names.
EngineKind parse_engine(std::string_view name);

enum class DispatchMode { Serial, Concurrent };

struct RateLimit {
  double per_second = 0;
  double burst = 0;
  friend bool operator==(const RateLimit&, const RateLimit&) = default;
};

struct EngineProfile {
  EngineKind kind = EngineKind::SuspendOrchestrator;
  std::optional<std::size_t> max_state_bytes;
  std::optional<std::size_t> max_actions;
  bool supports_parallel = true;
  bool composition_is_function = true;
  std::optional<RateLimit> transition_rate_limit;
  std::optional<std::size_t> compression_threshold_bytes;
  double compression_ratio = 0.5;

  // Timing knobs. Their meaning per engine is documented in README.md.
  double conductor_exec_ms = 0;     // conductor action / orchestrator episode / dispatch slice
  double replay_ms_per_event = 0;   // event sourcing: cost of replaying one history event
  double join_ms_per_result = 0;    // fan-in merge cost, times results already joined
  double activity_dispatch_ms = 0;  // event sourcing: work-item queue latency
  DispatchMode parallel_dispatch = DispatchMode::Serial;
  bool extended_sessions = false;
  Millis session_idle_timeout_ms = 30'000;

  /// Built-in limits and capabilities of each engine.
  static EngineProfile defaults(EngineKind kind);

  /// Applies overrides from section [engine] (keys mirror the field names;
  /// "none" clears an optional limit).
  static EngineProfile from_config(const Config& config, EngineKind kind);
  /// Same, applying keys of `section` on top of `base`.
  static EngineProfile from_config(const Config& config, const EngineProfile& base, const std::string& section);

  friend bool operator==(const EngineProfile&, const EngineProfile&) = default;
};

enum class HistoryKind {
  OrchestrationStarted,
  ActivityScheduled,
  ActivityCompleted,
  TimerCreated,
  TimerFired,
  ExternalEvent,
  OrchestrationCompleted,
};

std::string_view to_string(HistoryKind kind) noexcept;

struct HistoryEvent {
  std::uint64_t seq = 0;
  HistoryKind kind = HistoryKind::OrchestrationStarted;
  std::string activity;  // function name, or empty
  std::string path;      // composition node
  Payload payload;       // logical (uncompressed) payload
  std::size_t stored_bytes = 0;
  bool compressed = false;
  bool failed = false;   // ActivityCompleted of a failed attempt
  Millis duration = 0;   // TimerCreated
  Millis time = 0;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

using EventLog = std::vector<HistoryEvent>;

void write_history(std::ostream& out, const EventLog& log);
EventLog read_history(std::istream& in);

struct WorkflowResult {
  EngineKind engine = EngineKind::SuspendOrchestrator;
  bool ok = true;
  std::string error;
  Payload output;
  Millis start_time = 0;
  Millis end_time = 0;
  Millis wall_time_ms = 0;
  std::uint64_t execution = 0;
  std::optional<InvocationId> root;  // invocation of the composition itself
  std::vector<InvocationRecord> trace;
  std::uint64_t transitions = 0;
  std::optional<EventLog> history;
  std::uint64_t history_bytes = 0;
  std::uint64_t replay_count = 0;
  CompositionSpec spec;
};

/// Test hook for the event-sourcing engine: given the episode number, may
/// return a different composition to replay (used to provoke
/// NondeterminismDetected).
using OrchestratorOverride = std::function<std::optional<CompositionSpec>(std::uint64_t episode)>;

/// Common interface of the orchestration engines.
class Engine : public std::enable_shared_from_this<Engine> {
 public:
  explicit Engine(EngineProfile profile) : profile_(std::move(profile)) {}
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;
  virtual ~Engine() = default;

  [[nodiscard]] EngineKind kind() const noexcept { return profile_.kind; }
  [[nodiscard]] const EngineProfile& profile() const noexcept { return profile_; }

  /// Static checks against the profile: structural validity, action limit,
  /// parallel support.
  virtual void check(const CompositionSpec& spec) const;

  /// Runs one execution to completion on `runtime` and returns its result.
  /// Fatal engine errors (limits, nondeterminism) are thrown as Error; a
  /// workflow whose functions failed returns ok = false.
  WorkflowResult run(Runtime& runtime, const CompositionSpec& spec, Payload input);

  /// Starts one execution inside the event loop; `done` fires when it ends.
  void launch(Runtime& runtime, const CompositionSpec& spec, Payload input,
              std::function<void(WorkflowResult)> done);

  /// Registers `spec` under `name` as an ordinary function of `runtime`.
  /// Throws CompositionNotFunction on engines whose compositions are not
  /// functions.
  void register_composition(Runtime& runtime, const std::string& name, const CompositionSpec& spec);

 protected:
  struct Outcome {
    bool ok = true;
    Payload output;
    std::string error;
  };
  using Finish = std::function<void(Outcome)>;

  /// Per-execution facts attached to the result.
  struct ExecutionExtras {
    std::uint64_t transitions = 0;
    std::optional<EventLog> history;
    std::uint64_t replay_count = 0;
  };

  /// Orchestration logic driven from outside any function (the client
  /// scheduler) or on behalf of the composition function `parent`.
  virtual void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
                     std::optional<InvocationId> parent, Finish finish) = 0;

  /// Body of the composition function. The default hosts drive(): the
  /// function suspends until the orchestration reports back.
  virtual void host(const InvocationContext& ctx, const CompositionSpec& spec, std::uint64_t execution);

  ExecutionExtras& extras(const Runtime& runtime, std::uint64_t execution) {
    return extras_[{&runtime, execution}];
  }
  void count_transition(Runtime& runtime, std::uint64_t execution);

  WorkflowResult make_result(Runtime& runtime, const CompositionSpec& spec, std::uint64_t execution,
                             Millis start, const Outcome& outcome);

  EngineProfile profile_;

 private:

  std::map<std::pair<const Runtime*, std::uint64_t>, ExecutionExtras> extras_;
  // composition invocation -> execution it hosts
  std::map<std::pair<const Runtime*, std::uint64_t>, std::uint64_t> hosted_;
};

/// Engine factory with profile defaults for `kind`.
std::shared_ptr<Engine> make_engine(EngineKind kind);
std::shared_ptr<Engine> make_engine(EngineProfile profile);

/// Event-sourcing engine extras.
class EventSourcingEngine;
std::shared_ptr<EventSourcingEngine> make_event_sourcing_engine(EngineProfile profile);

class EventSourcingEngine : public Engine {
 public:
  using Engine::Engine;

  /// Replaces the orchestrator code seen by a given episode (test hook).
  void set_orchestrator_override(OrchestratorOverride hook) { override_ = std::move(hook); }

  /// Continues an execution from a (possibly truncated) history, as after a
  /// host crash: completed activities are not re-run, activities scheduled
  /// without completion are dispatched again.
  WorkflowResult resume(Runtime& runtime, const CompositionSpec& spec, Payload input, EventLog history);

 protected:
  void drive(Runtime& runtime, const CompositionSpec& spec, Payload input, std::uint64_t execution,
             std::optional<InvocationId> parent, Finish finish) override;

 private:
  struct Instance;
  friend struct Instance;

  std::shared_ptr<Instance> start_instance(Runtime& runtime, const CompositionSpec& spec, Payload input,
                                           std::uint64_t execution, std::optional<InvocationId> parent,
                                           std::optional<EventLog> seed, Finish finish);
  const std::string& orchestrator_function(Runtime& runtime);

  OrchestratorOverride override_;
  std::map<std::pair<const Runtime*, std::uint64_t>, std::shared_ptr<Instance>> instances_;
  std::map<const Runtime*, std::string> orchestrators_;
};

}  // namespace faasflow
