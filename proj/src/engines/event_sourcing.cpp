// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "engines.hpp"
#include "faasflow/error.hpp"

namespace faasflow {

namespace {

struct NewAction {
  HistoryKind kind = HistoryKind::ActivityScheduled;  // or TimerCreated
  std::string path;
  std::string activity;
  Payload input;
  Millis duration = 0;
  bool redispatch = false;  // already in the history, result never arrived
};

struct Step {
  bool blocked = false;
  bool ok = true;
  Payload output;
  std::string error;
  std::size_t latest = 0;  // newest history index the result depends on
};

/// One pass of the orchestrator code over the history. Awaits whose
/// results are recorded return them; the first unrecorded await on each
/// concurrent path becomes a new action and blocks that path.
class Replayer {
 public:
  Replayer(const EventLog& history, std::size_t fresh_from) : history_(history), fresh_from_(fresh_from) {
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& e = history[i];
      switch (e.kind) {
        case HistoryKind::ActivityScheduled:
        case HistoryKind::TimerCreated: scheduled_[e.path].push_back(i); break;
        case HistoryKind::ActivityCompleted:
        case HistoryKind::TimerFired: completed_[e.path].push_back(i); break;
        default: break;
      }
    }
  }

  Step eval(const Node& node, const std::string& path, const Payload& input) {
    if (const auto* task = std::get_if<Task>(&node.value)) {
      return await(HistoryKind::ActivityScheduled, path, task->function, input, 0);
    }
    if (const auto* wait = std::get_if<Wait>(&node.value)) {
      return await(HistoryKind::TimerCreated, path, {}, input, wait->duration_ms);
    }
    if (const auto* seq = std::get_if<Sequence>(&node.value)) {
      Step cur{false, true, input, {}, 0};
      for (std::size_t i = 0; i < seq->steps.size() && !cur.blocked && cur.ok; ++i) {
        cur = chain(cur, eval(seq->steps[i], node_path::step(path, i), cur.output));
      }
      return cur;
    }
    if (const auto* repeat = std::get_if<Repeat>(&node.value)) {
      Step cur{false, true, input, {}, 0};
      for (int i = 0; i < repeat->count && !cur.blocked && cur.ok; ++i) {
        cur = chain(cur, eval(*repeat->body, node_path::iteration(path, i), cur.output));
      }
      return cur;
    }
    if (const auto* choice = std::get_if<Choice>(&node.value)) {
      return choice->predicate.evaluate(input) ? eval(*choice->then_branch, node_path::then_arm(path), input)
                                               : eval(*choice->else_branch, node_path::else_arm(path), input);
    }
    if (const auto* retry = std::get_if<Retry>(&node.value)) {
      Step cur{false, true, input, {}, 0};
      for (int attempt = 1;; ++attempt) {
        Step r = chain(cur, eval(*retry->body, node_path::retry_body(path), input));
        if (r.blocked || r.ok || attempt >= retry->max_attempts) return r;
        cur = r;
        if (retry->backoff_ms > 0) {
          Step waited = chain(cur, await(HistoryKind::TimerCreated, path, {}, input, retry->backoff_ms));
          if (waited.blocked) return waited;
          cur = waited;
        }
      }
    }
    const auto& parallel = std::get<Parallel>(node.value);
    std::vector<Step> results;
    bool blocked = false;
    std::size_t done = 0;
    std::size_t latest = 0;
    for (std::size_t i = 0; i < parallel.branches.size(); ++i) {
      results.push_back(eval(parallel.branches[i], node_path::branch(path, i), input));
      if (results.back().blocked) {
        blocked = true;
      } else {
        ++done;
        latest = std::max(latest, results.back().latest);
      }
    }
    // Merging work is only spent while the fan-in is still being assembled.
    if (blocked || latest >= fresh_from_) joined_ += done;
    if (blocked) return Step{true, true, {}, {}, latest};
    std::vector<Payload> outputs;
    for (auto& r : results) {
      if (!r.ok) return Step{false, false, {}, r.error, latest};
      outputs.push_back(std::move(r.output));
    }
    return Step{false, true, join_outputs(outputs), {}, latest};
  }

  /// Scheduled events of the history the pass did not reach: the code no
  /// longer matches the history.
  void check_all_visited() const {
    for (const auto& [path, indices] : scheduled_) {
      const std::size_t reached = occurrences_.contains(path) ? occurrences_.at(path) : 0;
      if (reached < indices.size()) {
        throw Error(ErrorCode::NondeterminismDetected,
                    "history schedules '" + history_[indices[reached]].activity + "' at " + path +
                        " but the orchestrator no longer reaches it");
      }
    }
  }

  std::vector<NewAction> actions;   // awaits without a scheduled event
  std::vector<NewAction> in_flight; // scheduled awaits without a result
  std::size_t decompressed_bytes = 0;

  [[nodiscard]] std::size_t joined() const noexcept { return joined_; }

 private:
  static Step chain(const Step& before, Step next) {
    next.latest = std::max(next.latest, before.latest);
    return next;
  }

  Step await(HistoryKind kind, const std::string& path, const std::string& activity, const Payload& input,
             Millis duration) {
    const std::size_t occurrence = occurrences_[path]++;
    const auto sched = scheduled_.find(path);
    if (sched == scheduled_.end() || occurrence >= sched->second.size()) {
      actions.push_back(NewAction{kind, path, activity, input, duration});
      return Step{true, true, {}, {}, 0};
    }
    const HistoryEvent& scheduled = history_[sched->second[occurrence]];
    if (scheduled.kind != kind || scheduled.activity != activity) {
      const std::string found = scheduled.kind == HistoryKind::TimerCreated ? "a timer" : "'" + scheduled.activity + "'";
      const std::string wanted = kind == HistoryKind::TimerCreated ? "a timer" : "'" + activity + "'";
      throw Error(ErrorCode::NondeterminismDetected,
                  "replay at " + path + " wants " + wanted + " but history recorded " + found);
    }
    const auto comp = completed_.find(path);
    if (comp == completed_.end() || occurrence >= comp->second.size()) {
      in_flight.push_back(NewAction{kind, path, activity, input, scheduled.duration, true});
      return Step{true, true, {}, {}, 0};
    }
    const std::size_t index = comp->second[occurrence];
    const HistoryEvent& result = history_[index];
    if (result.compressed) decompressed_bytes += result.payload.size();
    if (result.failed) return Step{false, false, {}, result.payload, index};
    return Step{false, true, result.payload, {}, index};
  }

  const EventLog& history_;
  std::size_t fresh_from_;
  std::map<std::string, std::vector<std::size_t>> scheduled_;
  std::map<std::string, std::vector<std::size_t>> completed_;
  std::map<std::string, std::size_t> occurrences_;
  std::size_t joined_ = 0;
};

enum class MessageKind { Start, Result, Timer, Recover };

struct Message {
  MessageKind kind = MessageKind::Start;
  std::string path;
  std::string activity;
  Payload payload;
  bool failed = false;
};

}  // namespace

struct EventSourcingEngine::Instance {
  std::weak_ptr<EventSourcingEngine> engine;
  Runtime* rt = nullptr;
  CompositionSpec spec;
  Payload input;
  std::uint64_t execution = 0;
  std::optional<InvocationId> parent;
  Finish finish;

  EventLog history;
  std::deque<Message> inbox;
  bool busy = false;
  bool in_memory = false;
  bool finished = false;
  std::optional<TimerToken> eviction;
  std::uint64_t episodes = 0;

  // Prepared by the episode for its commit.
  std::size_t commit_from = 0;
  std::vector<NewAction> dispatch;
  std::optional<Outcome> outcome;

  void append(HistoryKind kind, std::string path, std::string activity, Payload payload, bool failed = false,
              Millis duration = 0) {
    const EngineProfile& p = engine.lock()->profile();
    HistoryEvent e;
    e.seq = history.size();
    e.kind = kind;
    e.activity = std::move(activity);
    e.path = std::move(path);
    e.stored_bytes = payload.size();
    if (p.compression_threshold_bytes && payload.size() > *p.compression_threshold_bytes) {
      e.compressed = true;
      e.stored_bytes = static_cast<std::size_t>(std::ceil(static_cast<double>(payload.size()) * p.compression_ratio));
    }
    e.payload = std::move(payload);
    e.failed = failed;
    e.duration = duration;
    e.time = rt->now();
    history.push_back(std::move(e));
  }

  void deliver(Message m) {
    if (finished) return;
    inbox.push_back(std::move(m));
    if (!busy) next();
  }

  void next();
  void run_episode(const InvocationContext& ctx);
  void commit();
  void start_action(const NewAction& action);
};

void EventSourcingEngine::Instance::next() {
  if (inbox.empty() || finished) return;
  busy = true;
  auto self = engine.lock();
  const Message& m = inbox.front();
  StartOptions opts{parent, execution, node_path::kRoot, std::nullopt};
  const Payload trigger = m.kind == MessageKind::Recover ? Payload{} : m.payload;
  rt->start(self->orchestrator_function(*rt), trigger, std::move(opts),
            [inst = self->instances_.at({rt, execution})](const InvocationRecord&) { inst->commit(); });
}

void EventSourcingEngine::Instance::run_episode(const InvocationContext& ctx) {
  auto self = engine.lock();
  const EngineProfile& p = self->profile();
  const std::uint64_t episode = episodes++;
  Message m = std::move(inbox.front());
  inbox.pop_front();

  const bool replay = !history.empty() && !(p.extended_sessions && in_memory);
  const std::size_t replayed = replay ? history.size() : 0;
  if (replay) ++self->extras(*rt, execution).replay_count;

  commit_from = history.size();
  switch (m.kind) {
    case MessageKind::Start: append(HistoryKind::OrchestrationStarted, node_path::kRoot, {}, m.payload); break;
    case MessageKind::Result:
      append(HistoryKind::ActivityCompleted, m.path, m.activity, m.payload, m.failed);
      break;
    case MessageKind::Timer: append(HistoryKind::TimerFired, m.path, {}, m.payload); break;
    case MessageKind::Recover: break;
  }

  std::optional<CompositionSpec> code;
  if (self->override_) code = self->override_(episode);
  const Node& root = code ? code->root : spec.root;

  Replayer replayer(history, commit_from);
  const Step result = replayer.eval(root, node_path::kRoot, input);
  replayer.check_all_visited();

  dispatch = std::move(replayer.actions);
  if (m.kind == MessageKind::Recover) {
    // Work scheduled before the crash whose result never arrived.
    for (auto& a : replayer.in_flight) dispatch.push_back(std::move(a));
  }
  outcome.reset();
  if (!result.blocked) outcome = Outcome{result.ok, result.output, result.error};

  double cost = p.conductor_exec_ms + p.join_ms_per_result * static_cast<double>(replayer.joined());
  Millis decompress = 0;
  if (replay) {
    cost += p.replay_ms_per_event * static_cast<double>(replayed);
    decompress = rt->latency().payload_ms(replayer.decompressed_bytes);
  }
  ctx.compute(rt->delay(cost) + decompress, [ctx] { ctx.complete({}); });
}

void EventSourcingEngine::Instance::commit() {
  auto self = engine.lock();
  const EngineProfile& p = self->profile();
  for (const auto& a : dispatch) {
    if (a.redispatch) continue;
    append(a.kind, a.path, a.activity, a.input, false, a.duration);
    self->count_transition(*rt, execution);
  }
  if (outcome) {
    append(HistoryKind::OrchestrationCompleted, node_path::kRoot, {}, outcome->ok ? outcome->output : outcome->error,
           !outcome->ok);
  }
  std::size_t bytes = 0;
  for (std::size_t i = commit_from; i < history.size(); ++i) bytes += history[i].stored_bytes;
  self->extras(*rt, execution).history = history;

  const Millis persist = rt->hop(rt->latency().log_write_ms, bytes);
  auto inst = self->instances_.at({rt, execution});
  rt->clock().schedule_after(persist, [inst, self, &p] {
    for (const auto& a : inst->dispatch) inst->start_action(a);
    inst->dispatch.clear();
    if (inst->outcome) {
      inst->finished = true;
      self->instances_.erase({inst->rt, inst->execution});
      if (inst->eviction) inst->rt->clock().cancel(*inst->eviction);
      inst->finish(*inst->outcome);
      return;
    }
    if (p.extended_sessions) {
      inst->in_memory = true;
      if (inst->eviction) inst->rt->clock().cancel(*inst->eviction);
      inst->eviction = inst->rt->clock().schedule_after(p.session_idle_timeout_ms, [inst] {
        inst->in_memory = false;
        inst->eviction.reset();
      });
    }
    inst->busy = false;
    inst->next();
  });
}

void EventSourcingEngine::Instance::start_action(const NewAction& action) {
  auto self = engine.lock();
  auto inst = self->instances_.at({rt, execution});
  if (action.kind == HistoryKind::TimerCreated) {
    rt->clock().schedule_after(action.duration, [inst, action] {
      const Millis deliver = inst->rt->delay(inst->rt->latency().queue_latency_ms);
      inst->rt->clock().schedule_after(deliver, [inst, action] {
        inst->deliver(Message{MessageKind::Timer, action.path, {}, action.input, false});
      });
    });
    return;
  }
  // Activities go through the work-item queue before a worker picks them up.
  const Millis queued = rt->hop(self->profile().activity_dispatch_ms, action.input.size());
  rt->clock().schedule_after(queued, [inst, action] {
    StartOptions opts{inst->parent, inst->execution, action.path, std::nullopt};
    inst->rt->start(action.activity, action.input, std::move(opts), [inst, action](const InvocationRecord& rec) {
      const bool ok = rec.state == InvocationState::Completed;
      const Millis deliver = inst->rt->hop(inst->rt->latency().queue_latency_ms, rec.output_bytes);
      inst->rt->clock().schedule_after(deliver, [inst, action, ok, payload = ok ? rec.output : rec.error] {
        inst->deliver(Message{MessageKind::Result, action.path, action.activity, payload, !ok});
      });
    });
  });
}

const std::string& EventSourcingEngine::orchestrator_function(Runtime& rt) {
  auto it = orchestrators_.find(&rt);
  if (it != orchestrators_.end() && rt.has_function(it->second)) return it->second;
  std::string name = rt.unique_key("__orchestrator");
  auto weak = std::weak_ptr(std::static_pointer_cast<EventSourcingEngine>(shared_from_this()));
  FunctionDef def;
  def.name = name;
  def.orchestrator = true;
  def.behavior = behavior::Native{[weak](InvocationContext ctx) {
    auto self = weak.lock();
    Runtime& r = ctx.runtime();
    self->instances_.at({&r, r.record(ctx.id()).execution})->run_episode(ctx);
  }};
  rt.register_function(std::move(def));
  orchestrators_[&rt] = name;
  return orchestrators_[&rt];
}

std::shared_ptr<EventSourcingEngine::Instance> EventSourcingEngine::start_instance(
    Runtime& rt, const CompositionSpec& spec, Payload input, std::uint64_t execution,
    std::optional<InvocationId> parent, std::optional<EventLog> seed, Finish finish) {
  auto inst = std::make_shared<Instance>();
  inst->engine = std::static_pointer_cast<EventSourcingEngine>(shared_from_this());
  inst->rt = &rt;
  inst->spec = spec;
  inst->input = input;
  inst->execution = execution;
  inst->parent = parent;
  inst->finish = std::move(finish);
  instances_[{&rt, execution}] = inst;

  if (!seed) {
    inst->deliver(Message{MessageKind::Start, node_path::kRoot, {}, std::move(input), false});
    return inst;
  }
  inst->history = std::move(*seed);
  for (std::size_t i = 0; i < inst->history.size(); ++i) inst->history[i].seq = i;
  extras(rt, execution).history = inst->history;
  for (const auto& e : inst->history) {
    if (e.kind == HistoryKind::OrchestrationCompleted) {
      // Already finished before the crash.
      Outcome done{!e.failed, e.failed ? Payload{} : e.payload, e.failed ? e.payload : std::string{}};
      inst->finished = true;
      instances_.erase({&rt, execution});
      rt.clock().schedule_after(0, [inst, done] { inst->finish(done); });
      return inst;
    }
  }
  if (inst->history.empty()) {
    inst->deliver(Message{MessageKind::Start, node_path::kRoot, {}, std::move(input), false});
  } else {
    inst->deliver(Message{MessageKind::Recover, {}, {}, {}, false});
  }
  return inst;
}

void EventSourcingEngine::drive(Runtime& rt, const CompositionSpec& spec, Payload input, std::uint64_t execution,
                                std::optional<InvocationId> parent, Finish finish) {
  start_instance(rt, spec, std::move(input), execution, parent, std::nullopt, std::move(finish));
}

WorkflowResult EventSourcingEngine::resume(Runtime& rt, const CompositionSpec& spec, Payload input,
                                           EventLog history) {
  check(spec);
  const std::uint64_t execution = rt.next_execution_id();
  extras(rt, execution) = {};
  const Millis start = rt.now();
  std::optional<WorkflowResult> result;
  auto self = std::static_pointer_cast<EventSourcingEngine>(shared_from_this());
  start_instance(rt, spec, std::move(input), execution, std::nullopt, std::move(history),
                 [self, &rt, &result, spec, execution, start](Outcome o) {
                   result = self->make_result(rt, spec, execution, start, o);
                 });
  rt.clock().run_until([&result] { return result.has_value(); });
  if (!result) throw Error(ErrorCode::WorkflowFailed, "resumed execution stalled before completing");
  result->trace = rt.trace();
  return std::move(*result);
}

}  // namespace faasflow
