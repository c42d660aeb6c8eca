// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/engine.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "engines.hpp"
#include "faasflow/config.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

std::string_view engine_name(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::ClientScheduler: return "asf";
    case EngineKind::ReactiveConductor: return "composer";
    case EngineKind::SequenceNative: return "sequences";
    case EngineKind::EventSourcing: return "adf";
    case EngineKind::SuspendOrchestrator: return "suspend";
    case EngineKind::InlineOrchestrator: return "inline";
  }
  return "?";
}

EngineKind parse_engine(std::string_view name) {
  for (auto kind : kAllEngines) {
    if (engine_name(kind) == name) return kind;
  }
  throw Error(ErrorCode::ValidationError,
              "unknown engine '" + std::string(name) + "' (expected asf, composer, sequences, adf, suspend or inline)");
}

EngineProfile EngineProfile::defaults(EngineKind kind) {
  EngineProfile p;
  p.kind = kind;
  switch (kind) {
    case EngineKind::ClientScheduler:
      p.max_state_bytes = 32'768;
      p.composition_is_function = false;
      p.transition_rate_limit = RateLimit{1000, 5000};
      break;
    case EngineKind::ReactiveConductor:
    case EngineKind::SequenceNative:
      p.max_state_bytes = 5'242'880;
      p.max_actions = 50;
      p.supports_parallel = false;
      break;
    case EngineKind::EventSourcing:
      p.compression_threshold_bytes = 61'440;
      break;
    case EngineKind::SuspendOrchestrator:
    case EngineKind::InlineOrchestrator:
      break;
  }
  return p;
}

EngineProfile EngineProfile::from_config(const Config& config, EngineKind kind) {
  return from_config(config, defaults(kind), "engine");
}

EngineProfile EngineProfile::from_config(const Config& config, const EngineProfile& base, const std::string& s) {
  EngineProfile p = base;

  auto optional_size = [&](const char* key, std::optional<std::size_t>& target) {
    const auto text = config.raw(s, key);
    if (!text) return;
    if (*text == "none" || text->empty()) {
      target.reset();
      return;
    }
    const double v = *config.number(s, key);
    if (v < 0) throw Error(ErrorCode::ConfigError, std::string(key) + " must be >= 0");
    target = static_cast<std::size_t>(v);
  };
  auto non_negative = [&](const char* key, double& target) {
    target = config.number_or(s, key, target);
    if (target < 0) throw Error(ErrorCode::ConfigError, std::string(key) + " must be >= 0");
  };

  optional_size("max_state_bytes", p.max_state_bytes);
  optional_size("max_actions", p.max_actions);
  optional_size("compression_threshold_bytes", p.compression_threshold_bytes);
  p.supports_parallel = config.flag(s, "supports_parallel").value_or(p.supports_parallel);
  p.composition_is_function = config.flag(s, "composition_is_function").value_or(p.composition_is_function);
  p.extended_sessions = config.flag(s, "extended_sessions").value_or(p.extended_sessions);

  if (const auto rate = config.raw(s, "transition_rate_limit"); rate && *rate == "none") {
    p.transition_rate_limit.reset();
  } else if (config.raw(s, "rate_per_second") || config.raw(s, "rate_burst")) {
    RateLimit limit = p.transition_rate_limit.value_or(RateLimit{});
    non_negative("rate_per_second", limit.per_second);
    non_negative("rate_burst", limit.burst);
    p.transition_rate_limit = limit;
  }

  non_negative("compression_ratio", p.compression_ratio);
  if (p.compression_ratio > 1.0) throw Error(ErrorCode::ConfigError, "compression_ratio must be <= 1");
  non_negative("conductor_exec_ms", p.conductor_exec_ms);
  non_negative("replay_ms_per_event", p.replay_ms_per_event);
  non_negative("join_ms_per_result", p.join_ms_per_result);
  non_negative("activity_dispatch_ms", p.activity_dispatch_ms);
  double idle = static_cast<double>(p.session_idle_timeout_ms);
  non_negative("session_idle_timeout_ms", idle);
  p.session_idle_timeout_ms = static_cast<Millis>(idle);

  if (const auto mode = config.raw(s, "parallel_dispatch")) {
    if (*mode == "serial") {
      p.parallel_dispatch = DispatchMode::Serial;
    } else if (*mode == "concurrent") {
      p.parallel_dispatch = DispatchMode::Concurrent;
    } else {
      throw Error(ErrorCode::ConfigError, "parallel_dispatch must be serial or concurrent, got '" + *mode + "'");
    }
  }
  return p;
}

std::string_view to_string(HistoryKind kind) noexcept {
  switch (kind) {
    case HistoryKind::OrchestrationStarted: return "OrchestrationStarted";
    case HistoryKind::ActivityScheduled: return "ActivityScheduled";
    case HistoryKind::ActivityCompleted: return "ActivityCompleted";
    case HistoryKind::TimerCreated: return "TimerCreated";
    case HistoryKind::TimerFired: return "TimerFired";
    case HistoryKind::ExternalEvent: return "ExternalEvent";
    case HistoryKind::OrchestrationCompleted: return "OrchestrationCompleted";
  }
  return "?";
}

void write_history(std::ostream& out, const EventLog& log) {
  for (const auto& e : log) {
    nlohmann::json j{{"seq", e.seq},
                     {"kind", std::string(to_string(e.kind))},
                     {"activity", e.activity},
                     {"path", e.path},
                     {"payload", e.payload},
                     {"stored_bytes", e.stored_bytes},
                     {"compressed", e.compressed},
                     {"failed", e.failed},
                     {"duration", e.duration},
                     {"time", e.time}};
    out << j.dump() << '\n';
  }
}

EventLog read_history(std::istream& in) {
  EventLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      HistoryEvent e;
      e.seq = j.at("seq").get<std::uint64_t>();
      const auto kind = j.at("kind").get<std::string>();
      bool known = false;
      for (int k = 0; k <= static_cast<int>(HistoryKind::OrchestrationCompleted); ++k) {
        if (to_string(static_cast<HistoryKind>(k)) == kind) {
          e.kind = static_cast<HistoryKind>(k);
          known = true;
        }
      }
      if (!known) throw Error(ErrorCode::ParseError, "unknown history event kind '" + kind + "'");
      e.activity = j.value("activity", "");
      e.path = j.value("path", "");
      e.payload = j.value("payload", "");
      e.stored_bytes = j.value("stored_bytes", std::size_t{0});
      e.compressed = j.value("compressed", false);
      e.failed = j.value("failed", false);
      e.duration = j.value("duration", Millis{0});
      e.time = j.value("time", Millis{0});
      log.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, std::string("history: ") + ex.what());
    }
  }
  return log;
}

// Engine ---------------------------------------------------------------------

void Engine::check(const CompositionSpec& spec) const {
  validate(spec);
  if (profile_.max_actions) {
    const std::size_t actions = action_count(spec);
    if (actions > *profile_.max_actions) {
      throw Error(ErrorCode::TooManyActions, std::to_string(actions) + " actions exceed the limit of " +
                                                 std::to_string(*profile_.max_actions));
    }
  }
  if (!profile_.supports_parallel && contains_parallel(spec.root)) {
    throw Error(ErrorCode::ParallelUnsupported,
                std::string(engine_name(kind())) + " does not support parallel composition");
  }
}

void Engine::count_transition(Runtime& runtime, std::uint64_t execution) {
  ++runtime.metrics().transitions;
  ++extras(runtime, execution).transitions;
}

WorkflowResult Engine::make_result(Runtime& runtime, const CompositionSpec& spec, std::uint64_t execution,
                                   Millis start, const Outcome& outcome) {
  WorkflowResult r;
  r.engine = kind();
  r.ok = outcome.ok;
  r.output = outcome.output;
  r.error = outcome.error;
  r.start_time = start;
  r.end_time = runtime.now();
  r.wall_time_ms = r.end_time - r.start_time;
  r.execution = execution;
  r.spec = spec;
  const auto& ex = extras(runtime, execution);
  r.transitions = ex.transitions;
  r.history = ex.history;
  r.replay_count = ex.replay_count;
  if (r.history) {
    for (const auto& e : *r.history) r.history_bytes += e.stored_bytes;
  }
  return r;
}

WorkflowResult Engine::run(Runtime& runtime, const CompositionSpec& spec, Payload input) {
  check(spec);
  std::optional<WorkflowResult> result;
  launch(runtime, spec, std::move(input), [&result](WorkflowResult r) { result = std::move(r); });
  runtime.clock().run_until([&result] { return result.has_value(); });
  if (!result) throw Error(ErrorCode::WorkflowFailed, "execution stalled before completing");
  result->trace = runtime.trace();
  return std::move(*result);
}

void Engine::launch(Runtime& runtime, const CompositionSpec& spec, Payload input,
                    std::function<void(WorkflowResult)> done) {
  check(spec);
  const Millis start = runtime.now();
  auto self = shared_from_this();

  if (!profile_.composition_is_function) {
    const std::uint64_t execution = runtime.next_execution_id();
    extras(runtime, execution) = {};
    drive(runtime, spec, std::move(input), execution, std::nullopt,
          [self, &runtime, spec, execution, start, done = std::move(done)](Outcome o) {
            done(self->make_result(runtime, spec, execution, start, o));
          });
    return;
  }

  const std::string name = runtime.unique_key("__composition");
  register_composition(runtime, name, spec);
  runtime.start(name, std::move(input), {},
                [self, &runtime, spec, start, done = std::move(done)](const InvocationRecord& rec) {
                  const std::uint64_t execution = self->hosted_.at({&runtime, rec.id.value});
                  Outcome o{rec.state == InvocationState::Completed, rec.output, rec.error};
                  WorkflowResult r = self->make_result(runtime, spec, execution, start, o);
                  r.root = rec.id;
                  done(std::move(r));
                });
}

void Engine::register_composition(Runtime& runtime, const std::string& name, const CompositionSpec& spec) {
  if (!profile_.composition_is_function) {
    throw Error(ErrorCode::CompositionNotFunction,
                std::string(engine_name(kind())) + " compositions cannot be registered as functions");
  }
  check(spec);
  auto self = shared_from_this();
  FunctionDef def;
  def.name = name;
  def.orchestrator = true;
  def.behavior = behavior::Native{[self, spec](InvocationContext ctx) {
    Runtime& rt = ctx.runtime();
    const std::uint64_t execution = rt.next_execution_id();
    self->hosted_[{&rt, ctx.id().value}] = execution;
    self->extras(rt, execution) = {};
    self->host(ctx, spec, execution);
  }};
  runtime.register_function(std::move(def));
}

void Engine::host(const InvocationContext& ctx, const CompositionSpec& spec, std::uint64_t execution) {
  Runtime& rt = ctx.runtime();
  const std::string key = rt.unique_key("__done");
  auto outcome = std::make_shared<Outcome>();
  drive(rt, spec, ctx.input(), execution, ctx.id(), [&rt, key, outcome](Outcome o) {
    *outcome = std::move(o);
    // Persisting the final result precedes the composition function's wake-up.
    const Millis d = rt.hop(rt.latency().log_write_ms, outcome->output.size());
    rt.publish_after(d, Event{key, outcome->output, 0});
  });
  ctx.suspend(key, [ctx, outcome](Payload) {
    if (outcome->ok) {
      ctx.complete(outcome->output);
    } else {
      ctx.fail(outcome->error);
    }
  });
}

// Factory --------------------------------------------------------------------

std::shared_ptr<Engine> make_engine(EngineKind kind) { return make_engine(EngineProfile::defaults(kind)); }

std::shared_ptr<Engine> make_engine(EngineProfile profile) {
  switch (profile.kind) {
    case EngineKind::ClientScheduler: return std::make_shared<detail::ClientSchedulerEngine>(std::move(profile));
    case EngineKind::ReactiveConductor:
      return std::make_shared<detail::ReactiveConductorEngine>(std::move(profile));
    case EngineKind::SequenceNative: return std::make_shared<detail::SequenceNativeEngine>(std::move(profile));
    case EngineKind::EventSourcing: return make_event_sourcing_engine(std::move(profile));
    case EngineKind::SuspendOrchestrator:
      return std::make_shared<detail::SuspendOrchestratorEngine>(std::move(profile));
    case EngineKind::InlineOrchestrator:
      return std::make_shared<detail::InlineOrchestratorEngine>(std::move(profile));
  }
  throw Error(ErrorCode::ValidationError, "unknown engine kind");
}

std::shared_ptr<EventSourcingEngine> make_event_sourcing_engine(EngineProfile profile) {
  profile.kind = EngineKind::EventSourcing;
  return std::make_shared<EventSourcingEngine>(std::move(profile));
}

namespace detail {

std::string helper_name(const std::string& base, double duration_ms) {
  std::ostringstream out;
  out << base << '@' << duration_ms;
  return out.str();
}

}  // namespace detail

}  // namespace faasflow
