// Copyright 2026 The faasflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "faasflow/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faasflow/error.hpp"

namespace faasflow {

std::string_view to_string(InvocationState state) noexcept {
  switch (state) {
    case InvocationState::Pending: return "Pending";
    case InvocationState::Running: return "Running";
    case InvocationState::Suspended: return "Suspended";
    case InvocationState::Completed: return "Completed";
    case InvocationState::Failed: return "Failed";
  }
  return "?";
}

Millis InvocationRecord::billed_ms() const noexcept {
  Millis total = 0;
  for (const auto& interval : billed_intervals) total += interval.length();
  return total;
}

// InvocationContext ----------------------------------------------------------

const Payload& InvocationContext::input() const { return runtime_->input_of(id_); }
Millis InvocationContext::now() const { return runtime_->now(); }

void InvocationContext::compute(Millis duration, std::function<void()> then) const {
  runtime_->compute(id_, duration, std::move(then));
}
void InvocationContext::suspend(const std::string& key,
                                std::function<void(Payload)> on_resume) const {
  runtime_->suspend(id_, key, std::move(on_resume));
}
void InvocationContext::complete(Payload output) const {
  runtime_->complete(id_, std::move(output));
}
void InvocationContext::fail(std::string error) const {
  runtime_->fail(id_, std::move(error));
}

// Runtime --------------------------------------------------------------------

Runtime::Runtime(LatencyModel latency, RuntimeOptions options)
    : latency_(latency), options_(options), rng_(options.seed) {
  latency_.validate();
  clock_.set_action_budget(options_.action_budget);
}

std::string Runtime::register_function(FunctionDef def) {
  if (def.name.empty()) {
    throw Error(ErrorCode::ValidationError, "function name must not be empty");
  }
  if (const auto* sleep = std::get_if<behavior::Sleep>(&def.behavior);
      sleep && sleep->duration < 0) {
    throw Error(ErrorCode::ValidationError, "sleep duration must be >= 0");
  }
  if (registry_.contains(def.name)) {
    throw Error(ErrorCode::DuplicateName, def.name);
  }
  std::string name = def.name;
  registry_.emplace(name, std::move(def));
  return name;
}

bool Runtime::has_function(std::string_view name) const {
  return registry_.find(name) != registry_.end();
}

const FunctionDef& Runtime::describe(std::string_view name) {
  auto it = registry_.find(name);
  if (it == registry_.end()) throw Error(ErrorCode::UnknownFunction, std::string(name));
  if (it->second.sealed) ++introspections_;
  return it->second;
}

void Runtime::seal(std::string_view name) {
  auto it = registry_.find(name);
  if (it == registry_.end()) throw Error(ErrorCode::UnknownFunction, std::string(name));
  it->second.sealed = true;
}

Millis Runtime::delay(double base_ms) {
  if (latency_.jitter > 0 && base_ms > 0) {
    std::uniform_real_distribution<double> noise(-latency_.jitter, latency_.jitter);
    base_ms *= 1.0 + noise(rng_);
  }
  return std::max<Millis>(0, std::llround(base_ms));
}

Millis Runtime::hop(double base_ms, std::size_t payload_bytes) {
  return delay(base_ms) + latency_.payload_ms(payload_bytes) +
         latency_.cliff_ms(payload_bytes);
}

std::string Runtime::unique_key(std::string_view prefix) {
  return std::string(prefix) + "#" + std::to_string(++key_counter_);
}

Runtime::Slot& Runtime::slot(InvocationId id) {
  if (id.value == 0 || id.value > slots_.size()) {
    throw std::out_of_range("unknown invocation " + std::to_string(id.value));
  }
  return slots_[id.value - 1];
}

const Runtime::Slot& Runtime::slot(InvocationId id) const {
  if (id.value == 0 || id.value > slots_.size()) {
    throw std::out_of_range("unknown invocation " + std::to_string(id.value));
  }
  return slots_[id.value - 1];
}

const InvocationRecord& Runtime::record(InvocationId id) const { return slot(id).record; }

const Payload& Runtime::input_of(InvocationId id) const { return slot(id).input; }

std::vector<InvocationRecord> Runtime::trace() const {
  std::vector<InvocationRecord> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) out.push_back(s.record);
  return out;
}

InvocationId Runtime::start(std::string_view function, Payload input,
                            StartOptions options, Completion on_done) {
  auto it = registry_.find(function);
  if (it == registry_.end()) {
    throw Error(ErrorCode::UnknownFunction, std::string(function));
  }
  const FunctionDef& def = it->second;
  std::size_t limit = def.max_payload_bytes;
  if (options.payload_limit) limit = std::min(limit, *options.payload_limit);
  if (input.size() > limit) {
    throw Error(ErrorCode::PayloadTooLarge,
                std::string(function) + " input of " + std::to_string(input.size()) +
                    " bytes exceeds limit " + std::to_string(limit));
  }

  const InvocationId id{slots_.size() + 1};
  Slot& s = slots_.emplace_back();
  s.record.id = id;
  s.record.function = def.name;
  s.record.parent = options.parent;
  s.record.execution = options.execution;
  s.record.path = std::move(options.path);
  s.record.orchestrator = def.orchestrator;
  s.record.submit_time = now();
  s.record.input_bytes = input.size();
  s.input = std::move(input);
  s.on_done = std::move(on_done);

  clock_.schedule_after(delay(latency_.invoke_latency_ms), [this, id] { begin(id); });
  return id;
}

void Runtime::begin(InvocationId id) {
  Slot& s = slot(id);
  s.record.state = InvocationState::Running;
  s.record.start_time = now();
  s.open_since = now();

  const FunctionDef& def = registry_.find(s.record.function)->second;
  const Millis transfer = latency_.payload_ms(s.input.size());
  const int count = ++invocation_counts_[def.name];

  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, behavior::Sleep>) {
          clock_.schedule_after(transfer + b.duration, [this, id] {
            finish(id, true, slot(id).input, {});
          });
        } else if constexpr (std::is_same_v<B, behavior::Echo>) {
          clock_.schedule_after(transfer, [this, id] { finish(id, true, slot(id).input, {}); });
        } else if constexpr (std::is_same_v<B, behavior::Scripted>) {
          clock_.schedule_after(transfer, [this, id] { run_script(id, 0, slot(id).input); });
        } else if constexpr (std::is_same_v<B, behavior::Flaky>) {
          const bool fails = count <= b.failures;
          clock_.schedule_after(transfer + b.duration, [this, id, fails, count] {
            if (fails) {
              finish(id, false, {}, "injected failure on attempt " + std::to_string(count));
            } else {
              finish(id, true, slot(id).input, {});
            }
          });
        } else {
          auto body = b.body;
          clock_.schedule_after(transfer, [this, id, body] { body(InvocationContext(*this, id)); });
        }
      },
      def.behavior);
}

void Runtime::run_script(InvocationId id, std::size_t step, Payload working) {
  const FunctionDef& def = registry_.find(slot(id).record.function)->second;
  const auto& steps = std::get<behavior::Scripted>(def.behavior).steps;
  if (step == steps.size()) {
    finish(id, true, std::move(working), {});
    return;
  }
  std::visit(
      [&](const auto& st) {
        using S = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<S, behavior::Compute>) {
          clock_.schedule_after(st.duration, [this, id, step, w = std::move(working)]() mutable {
            run_script(id, step + 1, std::move(w));
          });
        } else if constexpr (std::is_same_v<S, behavior::Increment>) {
          run_script(id, step + 1, increment_field(working, st.field));
        } else if constexpr (std::is_same_v<S, behavior::Suspend>) {
          suspend(id, st.key, [this, id, step](Payload p) { run_script(id, step + 1, std::move(p)); });
        } else if constexpr (std::is_same_v<S, behavior::Trigger>) {
          trigger_event(Event{st.key, working, now()});
          run_script(id, step + 1, std::move(working));
        } else {
          finish(id, false, {}, st.message);
        }
      },
      steps[step]);
}

void Runtime::compute(InvocationId id, Millis duration, std::function<void()> then) {
  if (slot(id).record.state != InvocationState::Running) {
    throw Error(ErrorCode::NotRunning, "compute on invocation " + std::to_string(id.value));
  }
  clock_.schedule_after(duration, std::move(then));
}

void Runtime::close_billing(Slot& s) {
  if (now() > s.open_since) s.record.billed_intervals.push_back({s.open_since, now()});
  s.open_since = now();
}

void Runtime::complete(InvocationId id, Payload output) {
  finish(id, true, std::move(output), {});
}

void Runtime::fail(InvocationId id, std::string error) {
  finish(id, false, {}, std::move(error));
}

void Runtime::finish(InvocationId id, bool ok, Payload output, std::string error) {
  Slot& s = slot(id);
  if (s.record.state != InvocationState::Running) {
    throw Error(ErrorCode::NotRunning,
                "finishing invocation " + std::to_string(id.value) + " in state " +
                    std::string(to_string(s.record.state)));
  }
  close_billing(s);
  s.record.end_time = now();
  s.record.state = ok ? InvocationState::Completed : InvocationState::Failed;
  s.record.output_bytes = output.size();
  s.record.output = std::move(output);
  s.record.error = std::move(error);
  if (s.on_done) {
    // Copy: the callback may start invocations that grow slots_.
    auto done = std::move(s.on_done);
    const InvocationRecord snapshot = s.record;
    done(snapshot);
  }
}

InvocationRecord Runtime::invoke(std::string_view function, Payload input,
                                 std::optional<InvocationId> caller) {
  if (clock_.running()) {
    throw std::logic_error("Runtime::invoke is not reentrant; use start() inside the loop");
  }
  StartOptions options;
  options.parent = caller;
  bool done = false;
  const InvocationId id =
      start(function, std::move(input), std::move(options),
            [&done](const InvocationRecord&) { done = true; });
  clock_.run_until([&] { return done; });
  return record(id);
}

InvocationId Runtime::invoke_async(std::string_view function, Payload input,
                                   std::string completion_key, StartOptions options) {
  return start(function, std::move(input), std::move(options),
               [this, key = std::move(completion_key)](const InvocationRecord& r) {
                 const Millis d = hop(latency_.delivery_base_ms(), r.output_bytes);
                 publish_after(d, Event{key, r.output, 0});
               });
}

void Runtime::publish_after(Millis delay_ms, Event event) {
  clock_.schedule_after(delay_ms, [this, e = std::move(event)]() mutable {
    e.fire_time = now();
    trigger_event(std::move(e));
  });
}

void Runtime::suspend(InvocationId id, const std::string& key,
                      std::function<void(Payload)> on_resume) {
  Slot& s = slot(id);
  if (s.record.state != InvocationState::Running) {
    throw Error(ErrorCode::NotRunning, "invocation " + std::to_string(id.value) + " is " +
                                           std::string(to_string(s.record.state)));
  }
  if (auto latched = latched_.find(key); latched != latched_.end()) {
    // Event arrived first: no billing gap, continue at the same instant.
    Payload payload = std::move(latched->second);
    latched_.erase(latched);
    clock_.schedule_after(0, [cb = std::move(on_resume), p = std::move(payload)]() mutable {
      cb(std::move(p));
    });
    return;
  }
  close_billing(s);
  s.record.state = InvocationState::Suspended;
  s.suspended_since = now();
  s.on_resume = std::move(on_resume);
  waiters_[key].push_back(id);
  s.timeout = clock_.schedule_after(options_.suspend_limit_ms, [this, id, key] {
    Slot& timed_out = slot(id);
    if (timed_out.record.state != InvocationState::Suspended) return;
    auto& list = waiters_[key];
    std::erase(list, id);
    if (list.empty()) waiters_.erase(key);
    timed_out.record.suspended_gaps.push_back({timed_out.suspended_since, now()});
    timed_out.record.state = InvocationState::Running;
    timed_out.open_since = now();
    timed_out.on_resume = nullptr;
    timed_out.timeout.reset();
    finish(id, false, {},
           to_string(ErrorCode::SuspendLimitExceeded).data() + std::string(" waiting on ") + key);
  });
}

std::vector<InvocationId> Runtime::trigger_event(Event event) {
  if (event.key.empty()) {
    throw Error(ErrorCode::ValidationError, "event key must not be empty");
  }
  auto it = waiters_.find(event.key);
  if (it == waiters_.end() || it->second.empty()) {
    latched_[event.key] = std::move(event.payload);
    return {};
  }
  std::vector<InvocationId> resumed = std::move(it->second);
  waiters_.erase(it);
  const Millis d = delay(latency_.queue_latency_ms);
  for (InvocationId id : resumed) {
    Slot& s = slot(id);
    if (s.timeout) {
      clock_.cancel(*s.timeout);
      s.timeout.reset();
    }
    clock_.schedule_after(d, [this, id, p = event.payload]() mutable { resume(id, std::move(p)); });
  }
  return resumed;
}

void Runtime::resume(InvocationId id, Payload payload) {
  Slot& s = slot(id);
  s.record.suspended_gaps.push_back({s.suspended_since, now()});
  s.record.state = InvocationState::Running;
  s.open_since = now();
  auto cb = std::move(s.on_resume);
  s.on_resume = nullptr;
  cb(std::move(payload));
}

}  // namespace faasflow
